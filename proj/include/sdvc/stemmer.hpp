#pragma once

#include <string>
#include <string_view>

namespace sdvc {

// Porter's suffix-stripping algorithm (1980 rule set, including the published
// departures). Deterministic; only lowercase a-z words are stemmed, anything
// else passes through unchanged. The rule behaviour is pinned by a golden
// word/stem fixture in the test suite.
std::string stem(std::string_view word);

}  // namespace sdvc
