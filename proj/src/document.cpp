#include "sdvc/document.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sdvc/text.hpp"

namespace sdvc {

namespace {

const std::map<std::string, Label, std::less<>>& label_table() {
  static const std::map<std::string, Label, std::less<>> table = {
      {"corner", Label::Corner},
      {"substitution", Label::Substitution},
      {"yellow card", Label::YellowCard},
      {"whistle", Label::Whistle},
      {"soccer ball", Label::SoccerBall},
      {"time", Label::Time},
      {"injury", Label::Injury},
      {"fun fact", Label::FunFact},
      {"attendance", Label::Attendance},
      {"penalty", Label::Penalty},
      {"red card", Label::RedCard},
      {"own goal", Label::OwnGoal},
      {"missed penalty", Label::MissedPenalty},
      {"other", Label::Other},
  };
  return table;
}

}  // namespace

Label label_from_string(std::string_view s) {
  auto it = label_table().find(s);
  return it == label_table().end() ? Label::Other : it->second;
}

std::string label_to_string(Label label) {
  for (const auto& [name, value] : label_table())
    if (value == label) return name;
  return "other";
}

bool is_known_label(std::string_view s) {
  return label_table().count(s) > 0;
}

const std::string& CaptionRecord::text(int field) const {
  switch (field) {
    case 0: return text_original;
    case 1: return text_identified;
    default: return text_anonymized;
  }
}

void ValidationReport::error(std::string path, std::string message) {
  errors.push_back({std::move(path), std::move(message)});
}

void ValidationReport::warning(std::string path, std::string message) {
  warnings.push_back({std::move(path), std::move(message)});
}

ordered_json ValidationReport::to_json() const {
  auto issues = [](const std::vector<ValidationIssue>& v) {
    ordered_json arr = ordered_json::array();
    for (const auto& issue : v)
      arr.push_back({{"path", issue.path}, {"message", issue.message}});
    return arr;
  };
  return {{"ok", ok()}, {"errors", issues(errors)}, {"warnings", issues(warnings)}};
}

namespace {

std::string describe(const ValidationReport& report) {
  std::ostringstream os;
  os << report.errors.size() << " validation error(s)";
  for (const auto& issue : report.errors)
    os << "\n  " << issue.path << ": " << issue.message;
  return os.str();
}

}  // namespace

ValidationError::ValidationError(ValidationReport report)
    : std::runtime_error(describe(report)), report_(std::move(report)) {}

namespace {

// Pulls `key` out of `obj` if it has the expected JSON type; otherwise
// records an error and leaves the default in place.
template <typename T>
bool take_field(ordered_json& obj, const char* key, const char* path, T* out,
                ValidationReport* report) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    report->error(path, std::string("missing field \"") + key + "\"");
    return false;
  }
  try {
    *out = it->get<T>();
  } catch (const ordered_json::exception&) {
    report->error(path, std::string("field \"") + key + "\" has wrong type");
    obj.erase(it);
    return false;
  }
  obj.erase(it);
  return true;
}

GameClock take_clock(ordered_json& obj, const char* key, const std::string& path,
                     ValidationReport* report) {
  std::string raw;
  if (!take_field(obj, key, path.c_str(), &raw, report)) return {};
  try {
    return parse_game_clock(raw);
  } catch (const std::invalid_argument& e) {
    report->error(path, e.what());
    return {};
  }
}

PlayerEvent parse_event(ordered_json obj, const std::string& path,
                        ValidationReport* report) {
  PlayerEvent ev;
  take_field(obj, "type", path.c_str(), &ev.type, report);
  ev.clock = take_clock(obj, "gameTime", path, report);
  ev.extra = std::move(obj);
  return ev;
}

Player parse_player(ordered_json obj, const std::string& path,
                    ValidationReport* report) {
  Player p;
  take_field(obj, "name", path.c_str(), &p.name, report);
  take_field(obj, "uid", path.c_str(), &p.uid, report);
  take_field(obj, "jersey", path.c_str(), &p.jersey, report);
  take_field(obj, "starter", path.c_str(), &p.starter, report);
  ordered_json events = ordered_json::array();
  take_field(obj, "events", path.c_str(), &events, report);
  if (events.is_array()) {
    size_t i = 0;
    for (auto& ev : events)
      p.events.push_back(
          parse_event(std::move(ev), path + ".events[" + std::to_string(i++) + "]", report));
  }
  p.extra = std::move(obj);
  return p;
}

TeamSheet parse_team(ordered_json obj, const std::string& path,
                     ValidationReport* report) {
  TeamSheet team;
  take_field(obj, "name", path.c_str(), &team.name, report);
  take_field(obj, "coach", path.c_str(), &team.coach, report);
  take_field(obj, "tactic", path.c_str(), &team.tactic, report);
  ordered_json players = ordered_json::array();
  take_field(obj, "players", path.c_str(), &players, report);
  if (players.is_array()) {
    size_t i = 0;
    for (auto& p : players)
      team.players.push_back(
          parse_player(std::move(p), path + ".players[" + std::to_string(i++) + "]", report));
  }
  team.extra = std::move(obj);
  return team;
}

CaptionRecord parse_annotation(ordered_json obj, const std::string& path,
                               ValidationReport* report) {
  CaptionRecord rec;
  rec.clock = take_clock(obj, "gameTime", path, report);
  take_field(obj, "description", path.c_str(), &rec.text_original, report);
  take_field(obj, "identified", path.c_str(), &rec.text_identified, report);
  take_field(obj, "anonymized", path.c_str(), &rec.text_anonymized, report);
  take_field(obj, "important", path.c_str(), &rec.important, report);
  if (take_field(obj, "label", path.c_str(), &rec.label_raw, report)) {
    if (!is_known_label(rec.label_raw))
      report->warning(path, "unknown label \"" + rec.label_raw + "\" treated as \"other\"");
    rec.label = label_from_string(rec.label_raw);
  }
  rec.extra = std::move(obj);
  return rec;
}

}  // namespace

GameDocument parse_game_document_lenient(std::string_view bytes,
                                         ValidationReport* report) {
  ordered_json root;
  try {
    root = ordered_json::parse(bytes);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  if (!root.is_object()) throw ParseError("top-level value is not an object", 0);

  GameDocument doc;
  std::string home_name, away_name;
  take_field(root, "gameHomeTeam", "$", &home_name, report);
  take_field(root, "gameAwayTeam", "$", &away_name, report);
  take_field(root, "referee", "$", &doc.referee, report);

  ordered_json lineups = ordered_json::object();
  if (take_field(root, "lineups", "$", &lineups, report) && lineups.is_object()) {
    if (lineups.contains("home")) {
      doc.teams[0] = parse_team(lineups["home"], "lineups.home", report);
      lineups.erase("home");
    } else {
      report->error("lineups", "missing field \"home\"");
    }
    if (lineups.contains("away")) {
      doc.teams[1] = parse_team(lineups["away"], "lineups.away", report);
      lineups.erase("away");
    } else {
      report->error("lineups", "missing field \"away\"");
    }
    doc.lineups_extra = std::move(lineups);
  }
  if (doc.teams[0].name.empty()) doc.teams[0].name = home_name;
  if (doc.teams[1].name.empty()) doc.teams[1].name = away_name;

  ordered_json annotations = ordered_json::array();
  take_field(root, "annotations", "$", &annotations, report);
  if (annotations.is_array()) {
    size_t i = 0;
    for (auto& ann : annotations)
      doc.captions.push_back(parse_annotation(
          std::move(ann), "annotations[" + std::to_string(i++) + "]", report));
  }
  doc.extra = std::move(root);

  // Ties keep file order.
  std::stable_sort(doc.captions.begin(), doc.captions.end(),
                   [](const CaptionRecord& a, const CaptionRecord& b) {
                     return a.clock < b.clock;
                   });

  ValidationReport inv = validate_document(doc);
  report->errors.insert(report->errors.end(), inv.errors.begin(), inv.errors.end());
  report->warnings.insert(report->warnings.end(), inv.warnings.begin(),
                          inv.warnings.end());
  return doc;
}

GameDocument parse_game_document(std::string_view bytes) {
  ValidationReport report;
  GameDocument doc = parse_game_document_lenient(bytes, &report);
  if (!report.ok()) throw ValidationError(std::move(report));
  return doc;
}

std::vector<std::string> entity_names_of(const GameDocument& doc) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  auto add = [&](const std::string& name) {
    if (name.empty()) return;
    if (seen.insert(name).second) names.push_back(name);
    std::string last = surname_of(name);
    if (!last.empty() && seen.insert(last).second) names.push_back(last);
  };
  for (const TeamSheet& team : doc.teams) {
    if (!team.name.empty() && seen.insert(team.name).second) names.push_back(team.name);
    add(team.coach);
    for (const Player& p : team.players) add(p.name);
  }
  add(doc.referee);
  return names;
}

ValidationReport validate_document(const GameDocument& doc) {
  ValidationReport report;

  for (int t = 0; t < 2; ++t) {
    const TeamSheet& team = doc.teams[t];
    std::string path = t == 0 ? "lineups.home" : "lineups.away";
    if (team.name.empty()) report.error(path, "team name is empty");
    int starters = 0;
    std::set<int> jerseys;
    for (size_t i = 0; i < team.players.size(); ++i) {
      const Player& p = team.players[i];
      if (p.starter) ++starters;
      if (!jerseys.insert(p.jersey).second)
        report.error(path + ".players[" + std::to_string(i) + "]",
                     "duplicate jersey number " + std::to_string(p.jersey));
    }
    if (starters != 11)
      report.error(path, "expected 11 starters, found " + std::to_string(starters));
  }

  std::set<std::string> uids;
  for (const TeamSheet& team : doc.teams)
    for (const Player& p : team.players)
      if (!p.uid.empty() && !uids.insert(p.uid).second)
        report.error("lineups", "duplicate player uid \"" + p.uid + "\"");

  // Folded entity names for the anonymized-text check.
  std::vector<std::string> entity_names = entity_names_of(doc);
  std::vector<std::vector<uint32_t>> folded_names;
  for (const std::string& name : entity_names)
    folded_names.push_back(fold_codepoints(name));

  for (size_t i = 0; i < doc.captions.size(); ++i) {
    const CaptionRecord& rec = doc.captions[i];
    std::string path = "annotations[" + std::to_string(i) + "]";
    if (rec.clock.half != 1 && rec.clock.half != 2)
      report.error(path, "half must be 1 or 2, got " + std::to_string(rec.clock.half));
    if (rec.clock.seconds < 0) report.error(path, "negative timestamp");
    if (rec.clock.seconds > 4200)
      report.warning(path, "timestamp beyond 70 minutes into the half");
    if (rec.text_original.empty()) report.error(path, "empty description");
    if (rec.text_identified.empty()) report.error(path, "empty identified text");
    if (rec.text_anonymized.empty()) report.error(path, "empty anonymized text");

    // [Player_uid] tokens must resolve to the lineups.
    std::vector<Codepoint> cps = decode_utf8(rec.text_identified);
    for (const TextSpan& span : protected_token_spans(cps)) {
      size_t begin = cps[span.begin].byte_offset;
      size_t end = cps[span.begin + span.length - 1].byte_offset +
                   cps[span.begin + span.length - 1].byte_length;
      std::string token = rec.text_identified.substr(begin, end - begin);
      if (token.rfind("[Player_", 0) == 0) {
        std::string uid = token.substr(8, token.size() - 9);
        if (!uids.count(uid))
          report.error(path, "token " + token + " does not match any lineup uid");
      }
    }

    // Anonymized text must not retain any entity surface form.
    std::vector<uint32_t> folded = fold_codepoints(rec.text_anonymized);
    std::vector<TextSpan> keep_out =
        protected_token_spans(decode_utf8(rec.text_anonymized));
    for (size_t n = 0; n < folded_names.size(); ++n) {
      for (const TextSpan& hit : find_word_occurrences(folded, folded_names[n])) {
        bool masked = std::any_of(keep_out.begin(), keep_out.end(),
                                  [&](const TextSpan& s) { return s.overlaps(hit); });
        if (!masked) {
          report.error(path, "anonymized text still contains entity name \"" +
                                 entity_names[n] + "\"");
          n = folded_names.size();  // one report per record is enough
          break;
        }
      }
    }
  }
  return report;
}

namespace {

ordered_json event_to_json(const PlayerEvent& ev) {
  ordered_json o;
  o["type"] = ev.type;
  o["gameTime"] = format_game_clock(ev.clock);
  for (auto& [k, v] : ev.extra.items()) o[k] = v;
  return o;
}

ordered_json player_to_json(const Player& p) {
  ordered_json o;
  o["name"] = p.name;
  o["uid"] = p.uid;
  o["jersey"] = p.jersey;
  o["starter"] = p.starter;
  ordered_json events = ordered_json::array();
  for (const PlayerEvent& ev : p.events) events.push_back(event_to_json(ev));
  o["events"] = std::move(events);
  for (auto& [k, v] : p.extra.items()) o[k] = v;
  return o;
}

ordered_json team_to_json(const TeamSheet& team) {
  ordered_json o;
  o["name"] = team.name;
  o["coach"] = team.coach;
  o["tactic"] = team.tactic;
  ordered_json players = ordered_json::array();
  for (const Player& p : team.players) players.push_back(player_to_json(p));
  o["players"] = std::move(players);
  for (auto& [k, v] : team.extra.items()) o[k] = v;
  return o;
}

}  // namespace

ordered_json document_to_json(const GameDocument& doc) {
  ordered_json o;
  o["gameHomeTeam"] = doc.teams[0].name;
  o["gameAwayTeam"] = doc.teams[1].name;
  o["referee"] = doc.referee;
  ordered_json lineups;
  lineups["home"] = team_to_json(doc.teams[0]);
  lineups["away"] = team_to_json(doc.teams[1]);
  for (auto& [k, v] : doc.lineups_extra.items()) lineups[k] = v;
  o["lineups"] = std::move(lineups);
  ordered_json annotations = ordered_json::array();
  for (const CaptionRecord& rec : doc.captions) {
    ordered_json a;
    a["gameTime"] = format_game_clock(rec.clock);
    a["description"] = rec.text_original;
    a["identified"] = rec.text_identified;
    a["anonymized"] = rec.text_anonymized;
    a["important"] = rec.important;
    a["label"] = rec.label_raw.empty() ? label_to_string(rec.label) : rec.label_raw;
    for (auto& [k, v] : rec.extra.items()) a[k] = v;
    annotations.push_back(std::move(a));
  }
  o["annotations"] = std::move(annotations);
  for (auto& [k, v] : doc.extra.items()) o[k] = v;
  return o;
}

std::string serialize_game_document(const GameDocument& doc) {
  return document_to_json(doc).dump(2) + "\n";
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

GameDocument load_game_document(const std::string& path) {
  GameDocument doc = parse_game_document(read_file(path));
  doc.game_id = std::filesystem::path(path).stem().string();
  return doc;
}

GameDocument load_game_document_lenient(const std::string& path,
                                        ValidationReport* report) {
  GameDocument doc = parse_game_document_lenient(read_file(path), report);
  doc.game_id = std::filesystem::path(path).stem().string();
  return doc;
}

}  // namespace sdvc
