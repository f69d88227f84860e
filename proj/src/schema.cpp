#include "sdvc/schema.hpp"

namespace sdvc {
namespace {

bool type_matches(const std::string& type, const ordered_json& value) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "number") return value.is_number();
  if (type == "integer") return value.is_number_integer();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  return false;
}

void check(const ordered_json& schema, const ordered_json& value,
           const std::string& path, std::vector<std::string>* out) {
  if (schema.contains("type")) {
    const std::string type = schema["type"].get<std::string>();
    if (!type_matches(type, value)) {
      out->push_back(path + ": expected " + type + ", got " +
                     std::string(value.type_name()));
      return;  // deeper checks would only cascade off the wrong shape
    }
  }
  if (schema.contains("enum")) {
    bool hit = false;
    for (const auto& option : schema["enum"])
      if (option == value) {
        hit = true;
        break;
      }
    if (!hit) out->push_back(path + ": value not among the allowed choices");
  }
  if (value.is_object()) {
    if (schema.contains("required"))
      for (const auto& key : schema["required"]) {
        const std::string name = key.get<std::string>();
        if (!value.contains(name))
          out->push_back(path + ": missing required key \"" + name + "\"");
      }
    const bool has_props = schema.contains("properties");
    bool extras_allowed = true;
    if (schema.contains("additionalProperties"))
      extras_allowed = schema["additionalProperties"].get<bool>();
    for (const auto& [key, sub] : value.items()) {
      if (has_props && schema["properties"].contains(key))
        check(schema["properties"][key], sub, path + "/" + key, out);
      else if (!extras_allowed)
        out->push_back(path + ": unexpected key \"" + key + "\"");
    }
  }
  if (value.is_array() && schema.contains("items")) {
    size_t index = 0;
    for (const auto& item : value) {
      check(schema["items"], item, path + "/" + std::to_string(index), out);
      ++index;
    }
  }
}

}  // namespace

std::vector<std::string> schema_violations(const ordered_json& schema,
                                           const ordered_json& value) {
  std::vector<std::string> out;
  check(schema, value, "$", &out);
  return out;
}

const ordered_json& report_schema() {
  static const ordered_json schema = ordered_json::parse(R"JSON({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "sdvc run report",
  "description": "Envelope written by every sdvc subcommand: the command name, an echo of the effective configuration (sufficient to reproduce the run, seed included), and the command-specific result payload.",
  "type": "object",
  "properties": {
    "command": {
      "type": "string",
      "enum": [
        "validate",
        "stats",
        "anonymize",
        "eval-spotting",
        "eval-caption",
        "eval-sdvc",
        "train",
        "infer",
        "selftest"
      ]
    },
    "config": { "type": "object" },
    "result": { "type": "object" }
  },
  "required": ["command", "config", "result"],
  "additionalProperties": false
})JSON");
  return schema;
}

const ordered_json& predictions_schema() {
  static const ordered_json schema = ordered_json::parse(R"JSON({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "sdvc prediction file",
  "description": "Single-anchored predictions for one game: each entry carries a game clock, a confidence in [0,1], and (for captioning systems) the generated comment.",
  "type": "object",
  "properties": {
    "game_id": { "type": "string" },
    "predictions": {
      "type": "array",
      "items": {
        "type": "object",
        "properties": {
          "gameTime": { "type": "string" },
          "confidence": { "type": "number" },
          "comment": { "type": "string" }
        },
        "required": ["gameTime", "confidence"],
        "additionalProperties": false
      }
    }
  },
  "required": ["game_id", "predictions"],
  "additionalProperties": false
})JSON");
  return schema;
}

}  // namespace sdvc
