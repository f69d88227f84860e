#ifndef SDVC_DOCUMENT_HPP
#define SDVC_DOCUMENT_HPP

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sdvc/clock.hpp"

namespace sdvc {

using ordered_json = nlohmann::ordered_json;

// Contextual label attached to each commentary.
enum class Label {
  Corner,
  Substitution,
  YellowCard,
  Whistle,
  SoccerBall,
  Time,
  Injury,
  FunFact,
  Attendance,
  Penalty,
  RedCard,
  OwnGoal,
  MissedPenalty,
  Other,
};

Label label_from_string(std::string_view s);
std::string label_to_string(Label label);
bool is_known_label(std::string_view s);

struct PlayerEvent {
  std::string type;
  GameClock clock;
  ordered_json extra = ordered_json::object();
};

struct Player {
  std::string uid;
  std::string name;
  int jersey = 0;
  bool starter = false;
  std::vector<PlayerEvent> events;
  ordered_json extra = ordered_json::object();
};

struct TeamSheet {
  std::string name;
  std::string coach;
  std::string tactic;
  std::vector<Player> players;
  ordered_json extra = ordered_json::object();
};

// One timestamped commentary with its three text versions.
struct CaptionRecord {
  GameClock clock;
  std::string text_original;
  std::string text_identified;
  std::string text_anonymized;
  bool important = false;
  Label label = Label::Other;
  std::string label_raw;  // as it appeared in the file, kept for round-trips
  ordered_json extra = ordered_json::object();

  const std::string& text(int field) const;  // 0=original 1=identified 2=anonymized
};

enum class TextField { Original = 0, Identified = 1, Anonymized = 2 };

struct GameDocument {
  std::string game_id;
  std::array<TeamSheet, 2> teams;  // home, away
  std::string referee;
  std::vector<CaptionRecord> captions;  // sorted by (half, seconds)
  ordered_json extra = ordered_json::object();
  ordered_json lineups_extra = ordered_json::object();
};

struct ValidationIssue {
  std::string path;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;

  bool ok() const { return errors.empty(); }
  void error(std::string path, std::string message);
  void warning(std::string path, std::string message);
  ordered_json to_json() const;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, size_t byte_offset)
      : std::runtime_error(message), byte_offset_(byte_offset) {}
  size_t byte_offset() const { return byte_offset_; }

 private:
  size_t byte_offset_;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

// Strict parse: JSON syntax errors throw ParseError with the byte offset,
// invariant violations throw ValidationError listing every violation.
GameDocument parse_game_document(std::string_view bytes);

// Lenient parse: same checks, but violations are accumulated into `report`
// and a best-effort document is returned. Only syntax errors throw.
GameDocument parse_game_document_lenient(std::string_view bytes,
                                         ValidationReport* report);

// Full invariant check on an already-built document.
ValidationReport validate_document(const GameDocument& doc);

ordered_json document_to_json(const GameDocument& doc);
std::string serialize_game_document(const GameDocument& doc);

// Reads a document from disk; game_id defaults to the file stem.
GameDocument load_game_document(const std::string& path);
GameDocument load_game_document_lenient(const std::string& path,
                                        ValidationReport* report);

// Every entity name appearing in the document metadata: team names,
// coaches, referee, player full names and surnames. Used by validation
// and by the anonymizer.
std::vector<std::string> entity_names_of(const GameDocument& doc);

}  // namespace sdvc

#endif
