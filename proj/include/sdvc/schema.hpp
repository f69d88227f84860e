#pragma once

#include <string>
#include <vector>

#include "sdvc/document.hpp"

namespace sdvc {

// Checks `value` against a small JSON-schema subset: type, enum, properties,
// required, additionalProperties (boolean form), and items. Returns one
// message per violation; an empty result means the value conforms.
std::vector<std::string> schema_violations(const ordered_json& schema,
                                           const ordered_json& value);

// Built-in copies of the schemas shipped under schemas/. The files are the
// published contract; these accessors let the tool validate its own output
// without knowing where the repository lives. A unit test pins file and
// built-in together.
const ordered_json& report_schema();
const ordered_json& predictions_schema();

}  // namespace sdvc
