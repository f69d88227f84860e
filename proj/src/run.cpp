#include "sdvc/run.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sdvc/anonymizer.hpp"
#include "sdvc/caption_metrics.hpp"
#include "sdvc/checkpoint.hpp"
#include "sdvc/clock.hpp"
#include "sdvc/features.hpp"
#include "sdvc/model.hpp"
#include "sdvc/schema.hpp"
#include "sdvc/sdvc_eval.hpp"
#include "sdvc/stats.hpp"
#include "sdvc/temporal_eval.hpp"
#include "sdvc/text.hpp"
#include "sdvc/train.hpp"
#include "sdvc/vocabulary.hpp"

namespace fs = std::filesystem;

namespace sdvc {
namespace {

// A usage problem (unknown flag, malformed value, contradictory request);
// everything else that throws is a data/validation failure. run() maps the
// former to exit 2 and the latter to exit 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string trimmed(std::string_view s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  size_t b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

}  // namespace

// ------------------------------------------------------------ split manifest

SplitManifest SplitManifest::parse(std::string_view bytes) {
  ordered_json root;
  try {
    root = ordered_json::parse(bytes);
  } catch (const ordered_json::parse_error& e) {
    throw std::runtime_error(std::string("split manifest: ") + e.what());
  }
  if (!root.is_object())
    throw std::runtime_error("split manifest must be a JSON object");
  SplitManifest out;
  auto read_list = [&](const char* key, std::vector<std::string>* dst) {
    if (!root.contains(key)) return;
    if (!root[key].is_array())
      throw std::runtime_error(std::string("split manifest: ") + key +
                               " must be an array of game ids");
    for (const auto& v : root[key]) {
      if (!v.is_string())
        throw std::runtime_error(std::string("split manifest: ") + key +
                                 " entries must be strings");
      dst->push_back(v.get<std::string>());
    }
  };
  read_list("train", &out.train);
  read_list("valid", &out.valid);
  read_list("test", &out.test);
  return out;
}

SplitManifest SplitManifest::load(const std::string& path) {
  try {
    return parse(slurp(path));
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

ordered_json SplitManifest::to_json() const {
  ordered_json o;
  o["train"] = train;
  o["valid"] = valid;
  o["test"] = test;
  return o;
}

void validate_split(const SplitManifest& split) {
  if (split.train.empty())
    throw std::runtime_error("split manifest: train list is empty");
  std::map<std::string, const char*> seen;
  auto visit = [&](const std::vector<std::string>& ids, const char* name) {
    for (const std::string& id : ids) {
      auto [it, fresh] = seen.emplace(id, name);
      if (fresh) continue;
      if (std::string(it->second) == name)
        throw std::runtime_error("split manifest: \"" + id +
                                 "\" appears twice in " + name);
      throw std::runtime_error("split manifest: \"" + id + "\" appears in " +
                               it->second + " and " + name);
    }
  };
  visit(split.train, "train");
  visit(split.valid, "valid");
  visit(split.test, "test");
}

// ------------------------------------------------------------------ corpus io

FilterOutcome filter_corpus(std::vector<GameDocument>* docs,
                            const std::vector<Label>& drop_labels) {
  FilterOutcome out;
  if (docs == nullptr || drop_labels.empty()) return out;
  for (GameDocument& doc : *docs) {
    std::vector<CaptionRecord> kept;
    kept.reserve(doc.captions.size());
    for (CaptionRecord& c : doc.captions) {
      if (std::find(drop_labels.begin(), drop_labels.end(), c.label) !=
          drop_labels.end()) {
        ++out.removed;
        ++out.by_label[label_to_string(c.label)];
      } else {
        kept.push_back(std::move(c));
      }
    }
    doc.captions = std::move(kept);
  }
  return out;
}

namespace {

std::vector<fs::path> list_document_paths(const std::string& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw std::runtime_error("not a directory: " + dir);
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path& p = entry.path();
    if (p.extension() != ".json") continue;
    std::string name = p.filename().string();
    if (!name.empty() && name.front() == '_') continue;  // tool reports
    paths.push_back(p);
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

}  // namespace

std::vector<GameDocument> load_corpus_dir(const std::string& dir,
                                          ValidationReport* report) {
  std::vector<GameDocument> docs;
  for (const fs::path& p : list_document_paths(dir)) {
    if (report != nullptr) {
      ValidationReport local;
      docs.push_back(load_game_document_lenient(p.string(), &local));
      const std::string file = p.filename().string();
      for (ValidationIssue& e : local.errors)
        report->error(file + ":" + e.path, e.message);
      for (ValidationIssue& w : local.warnings)
        report->warning(file + ":" + w.path, w.message);
    } else {
      docs.push_back(load_game_document(p.string()));
    }
  }
  return docs;
}

// ------------------------------------------------------- shared CLI plumbing

namespace {

template <typename T>
CLI::Option* add_opt(CLI::App& cmd, const std::string& name, T& var,
                     const std::string& desc) {
  return cmd.add_option(name, var, desc)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

CLI::Option* add_switch(CLI::App& cmd, const std::string& name, bool& var,
                        const std::string& desc) {
  return cmd.add_flag(name, var, desc)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

// Key=value lines, full-line # comments. Each entry becomes a --key=value
// token appended after the command line, so with TakeLast options the file
// overrides flags.
std::vector<std::string> config_tokens(const std::string& path) {
  std::string text;
  try {
    text = slurp(path);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  std::vector<std::string> tokens;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    std::string entry = trimmed(line);
    if (entry.empty() || entry.front() == '#') continue;
    size_t eq = entry.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) +
                       ": expected key=value");
    std::string key = trimmed(entry.substr(0, eq));
    std::string value = trimmed(entry.substr(eq + 1));
    if (key.empty())
      throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
    tokens.push_back("--" + key + "=" + value);
  }
  return tokens;
}

std::string unknown_argument_message(const CLI::App& cmd,
                                     const std::string& arg) {
  std::string msg = "unknown argument '" + arg + "'";
  if (arg.rfind("--", 0) == 0) {
    std::string bare = arg.substr(2);
    size_t eq = bare.find('=');
    if (eq != std::string::npos) bare = bare.substr(0, eq);
    std::string best;
    size_t best_d = std::string::npos;
    for (const CLI::Option* opt : cmd.get_options()) {
      for (const std::string& lname : opt->get_lnames()) {
        size_t d = edit_distance(bare, lname);
        if (d < best_d) {
          best_d = d;
          best = lname;
        }
      }
    }
    if (!best.empty() && best_d <= std::max<size_t>(2, bare.size() / 3))
      msg += " (did you mean '--" + best + "'?)";
  }
  return msg + "; see --help for the flag list";
}

// Returns false when --help was requested (help already printed).
bool parse_command(CLI::App* cmd, std::vector<std::string> tokens) {
  std::string config_path;
  for (size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    if (t == "--config" && i + 1 < tokens.size())
      config_path = tokens[i + 1];
    else if (t.rfind("--config=", 0) == 0)
      config_path = t.substr(9);
  }
  if (!config_path.empty()) {
    std::vector<std::string> extra = config_tokens(config_path);
    tokens.insert(tokens.end(), extra.begin(), extra.end());
  }
  std::reverse(tokens.begin(), tokens.end());  // CLI11 consumes back-to-front
  try {
    cmd->parse(tokens);
  } catch (const CLI::CallForHelp&) {
    std::cout << cmd->help();
    return false;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  std::vector<std::string> extras = cmd->remaining();
  if (!extras.empty())
    throw UsageError(unknown_argument_message(*cmd, extras.front()));
  return true;
}

// Every artifact is the same envelope; writing one that fails the published
// schema is a bug, not a data problem.
void emit_report(const std::string& out, const std::string& command,
                 const ordered_json& config, const ordered_json& result) {
  ordered_json report;
  report["command"] = command;
  report["config"] = config;
  report["result"] = result;
  std::vector<std::string> errs = schema_violations(report_schema(), report);
  if (!errs.empty())
    throw std::logic_error("internal: report fails its own schema: " +
                           errs.front());
  std::string text = report.dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_file(out, text);
}

std::vector<double> parse_double_list(const std::string& csv,
                                      const std::string& flag) {
  std::vector<std::string> items;
  {
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::string t = trimmed(item);
      if (!t.empty()) items.push_back(t);
    }
  }
  std::vector<double> out;
  for (const std::string& item : items) {
    try {
      size_t used = 0;
      double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw UsageError(flag + " needs at least one value");
  return out;
}

std::vector<std::string> split_commas(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string t = trimmed(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::vector<Label> parse_labels(const std::string& csv,
                                const std::string& flag) {
  std::vector<Label> out;
  for (const std::string& item : split_commas(csv)) {
    if (!is_known_label(item))
      throw UsageError(flag + ": unknown label '" + item + "'");
    out.push_back(label_from_string(item));
  }
  return out;
}

ordered_json filter_json(const FilterOutcome& outcome) {
  ordered_json o;
  o["removed"] = outcome.removed;
  ordered_json by = ordered_json::object();
  for (const auto& [label, n] : outcome.by_label) by[label] = n;
  o["by_label"] = std::move(by);
  return o;
}

std::vector<GameDocument> load_corpus_checked(const std::string& dir,
                                              const char* command) {
  ValidationReport report;
  std::vector<GameDocument> docs = load_corpus_dir(dir, &report);
  if (!report.ok()) {
    std::ostringstream msg;
    msg << command << ": " << report.errors.size() << " document error(s) in "
        << dir << " (first: " << report.errors.front().path << ": "
        << report.errors.front().message << "); run `sdvc validate` for the "
        << "full list";
    throw std::runtime_error(msg.str());
  }
  for (const ValidationIssue& w : report.warnings)
    std::cerr << command << ": warning: " << w.path << ": " << w.message
              << "\n";
  return docs;
}

std::map<std::string, PredictionSet> load_prediction_sets(
    const std::string& path) {
  std::map<std::string, PredictionSet> out;
  std::error_code ec;
  std::vector<fs::path> files;
  if (fs::is_directory(path, ec)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (!entry.is_regular_file()) continue;
      const fs::path& p = entry.path();
      if (p.extension() != ".json") continue;
      std::string name = p.filename().string();
      if (!name.empty() && name.front() == '_') continue;
      files.push_back(p);
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw std::runtime_error("no prediction files in " + path);
  } else {
    files.emplace_back(path);
  }
  for (const fs::path& f : files) {
    PredictionSet set = load_prediction_set(f.string());
    std::string id = set.game_id;
    if (!out.emplace(id, std::move(set)).second)
      throw std::runtime_error("duplicate predictions for game " + id);
  }
  return out;
}

// Loads {dir}/{id}.{1,2}.snf. expected_dim 0 accepts any width but pins the
// first one seen so mixed widths still fail loudly.
std::vector<HalfFeatures> load_game_features(const std::string& dir,
                                             const std::string& id,
                                             int* expected_dim) {
  std::vector<HalfFeatures> halves;
  for (int half = 1; half <= 2; ++half) {
    std::string path = dir + "/" + id + "." + std::to_string(half) + ".snf";
    FeatureMatrix f = load_features(path, *expected_dim);
    if (*expected_dim == 0) *expected_dim = int(f.cols());
    HalfFeatures h;
    h.frames = f.cast<double>();
    h.fps = 1.0;
    halves.push_back(std::move(h));
  }
  return halves;
}

std::string tolerance_key(double v) { return std::to_string(int(v)); }

// ------------------------------------------------------------------ validate

int cmd_validate(std::vector<std::string> tokens) {
  CLI::App cmd{"Check game documents against the format invariants"};
  cmd.name("sdvc validate");
  cmd.allow_extras(true);
  std::string corpus, out, config;
  uint64_t seed = 0;
  add_opt(cmd, "--corpus", corpus, "directory of game documents")->required();
  add_opt(cmd, "--out", out, "report path (default: stdout)");
  add_opt(cmd, "--config", config, "key=value file; entries override flags");
  add_opt(cmd, "--seed", seed, "RNG seed (unused here, echoed for parity)")
      ->envname("SDVC_SEED");
  if (!parse_command(&cmd, std::move(tokens))) return 0;

  std::vector<fs::path> paths = list_document_paths(corpus);
  ordered_json games = ordered_json::array();
  long n_errors = 0, n_warnings = 0;
  for (const fs::path& p : paths) {
    ValidationReport local;
    try {
      load_game_document_lenient(p.string(), &local);
    } catch (const std::exception& e) {
      local.error("$", e.what());
    }
    n_errors += long(local.errors.size());
    n_warnings += long(local.warnings.size());
    ordered_json g;
    g["file"] = p.filename().string();
    g["report"] = local.to_json();
    games.push_back(std::move(g));
  }

  ordered_json echo;
  echo["corpus"] = corpus;
  echo["seed"] = seed;
  ordered_json result;
  result["n_games"] = long(paths.size());
  result["n_errors"] = n_errors;
  result["n_warnings"] = n_warnings;
  result["ok"] = (n_errors == 0);
  result["games"] = std::move(games);
  emit_report(out, "validate", echo, result);
  std::cerr << "validate: " << paths.size() << " document(s), " << n_errors
            << " error(s), " << n_warnings << " warning(s)\n";
  return n_errors == 0 ? 0 : 1;
}

// --------------------------------------------------------------------- stats

int cmd_stats(std::vector<std::string> tokens) {
  CLI::App cmd{"Corpus statistics: caption counts, lengths, vocabulary, "
               "temporal histogram"};
  cmd.name("sdvc stats");
  cmd.allow_extras(true);
  std::string corpus, out, config, drop_csv;
  int bin_seconds = 60, text_field = 2;
  uint64_t seed = 0;
  add_opt(cmd, "--corpus", corpus, "directory of game documents")->required();
  add_opt(cmd, "--bin-seconds", bin_seconds, "temporal histogram bin width");
  add_opt(cmd, "--text-field", text_field,
          "0 original, 1 identified, 2 anonymized");
  add_opt(cmd, "--drop-labels", drop_csv,
          "comma-separated labels to remove before counting");
  add_opt(cmd, "--out", out, "report path (default: stdout)");
  add_opt(cmd, "--config", config, "key=value file; entries override flags");
  add_opt(cmd, "--seed", seed, "RNG seed (unused here, echoed for parity)")
      ->envname("SDVC_SEED");
  if (!parse_command(&cmd, std::move(tokens))) return 0;
  if (bin_seconds < 1) throw UsageError("--bin-seconds must be >= 1");
  if (text_field < 0 || text_field > 2)
    throw UsageError("--text-field must be 0, 1, or 2");
  std::vector<Label> drop = parse_labels(drop_csv, "--drop-labels");

  std::vector<GameDocument> docs = load_corpus_checked(corpus, "stats");
  FilterOutcome outcome = filter_corpus(&docs, drop);
  CorpusStats stats = compute_stats(docs, bin_seconds, text_field);

  ordered_json echo;
  echo["corpus"] = corpus;
  echo["bin_seconds"] = bin_seconds;
  echo["text_field"] = text_field;
  echo["drop_labels"] = drop_csv;
  echo["seed"] = seed;
  ordered_json result = stats.to_json();
  result["filtered"] = filter_json(outcome);
  emit_report(out, "stats", echo, result);
  return 0;
}

// ----------------------------------------------------------------- anonymize

int cmd_anonymize(std::vector<std::string> tokens) {
  CLI::App cmd{"Rewrite caption entity mentions into identified/anonymized "
               "forms"};
  cmd.name("sdvc anonymize");
  cmd.allow_extras(true);
  std::string corpus, out, overrides, config;
  uint64_t seed = 0;
  add_opt(cmd, "--corpus", corpus, "directory of game documents")->required();
  add_opt(cmd, "--out", out, "output directory for rewritten documents")
      ->required();
  add_opt(cmd, "--overrides", overrides,
          "JSON sidecar forcing span -> entity resolutions");
  add_opt(cmd, "--config", config, "key=value file; entries override flags");
  add_opt(cmd, "--seed", seed, "RNG seed (unused here, echoed for parity)")
      ->envname("SDVC_SEED");
  if (!parse_command(&cmd, std::move(tokens))) return 0;

  std::vector<fs::path> paths = list_document_paths(corpus);
  std::error_code ec;
  fs::create_directories(out, ec);
  ordered_json games = ordered_json::array();
  long total_spans = 0, total_applied = 0;
  for (const fs::path& p : paths) {
    ValidationReport rep;  // input docs may predate anonymization; rewrite anyway
    GameDocument doc = load_game_document_lenient(p.string(), &rep);
    EntityIndex index = build_entity_index(doc);
    if (!overrides.empty()) load_overrides(&index, overrides);
    std::vector<std::vector<UnresolvedSpan>> spans =
        anonymize_document(&doc, index);
    write_file(out + "/" + p.filename().string(),
               serialize_game_document(doc));

    ordered_json unresolved = ordered_json::array();
    for (size_t ci = 0; ci < spans.size(); ++ci) {
      for (const UnresolvedSpan& s : spans[ci]) {
        ++total_spans;
        if (s.applied) ++total_applied;
        ordered_json row;
        row["caption"] = long(ci);
        row["byte_offset"] = long(s.byte_offset);
        row["text"] = s.text;
        row["matched"] = s.matched;
        row["score"] = round6(s.score);
        row["applied"] = s.applied;
        row["reason"] = s.reason;
        unresolved.push_back(std::move(row));
      }
    }
    ordered_json g;
    g["file"] = p.filename().string();
    g["game_id"] = doc.game_id;
    g["n_captions"] = long(doc.captions.size());
    g["unresolved"] = std::move(unresolved);
    games.push_back(std::move(g));
  }

  ordered_json echo;
  echo["corpus"] = corpus;
  echo["out"] = out;
  echo["overrides"] = overrides;
  echo["seed"] = seed;
  ordered_json result;
  result["n_games"] = long(paths.size());
  result["n_flagged_spans"] = total_spans;
  result["n_fuzzy_applied"] = total_applied;
  result["games"] = std::move(games);
  emit_report(out + "/_report.json", "anonymize", echo, result);
  std::cerr << "anonymize: " << paths.size() << " document(s) -> " << out
            << ", " << total_spans << " span(s) flagged\n";
  return 0;
}

// ------------------------------------------------------------- eval-spotting

int cmd_eval_spotting(std::vector<std::string> tokens) {
  CLI::App cmd{"Spotting mAP against ground-truth caption anchors"};
  cmd.name("sdvc eval-spotting");
  cmd.allow_extras(true);
  std::string gt, pred, out, config, tol_csv = "5,30,60", drop_csv;
  bool wide_window = false, eleven_point = false;
  uint64_t seed = 0;
  add_opt(cmd, "--gt", gt, "directory of ground-truth game documents")
      ->required();
  add_opt(cmd, "--pred", pred, "prediction file or directory")->required();
  add_opt(cmd, "--tolerances", tol_csv, "tolerances in seconds");
  add_opt(cmd, "--drop-labels", drop_csv,
          "labels removed from the ground truth before scoring");
  add_switch(cmd, "--wide-window", wide_window,
             "match within |dt| <= tolerance instead of tolerance/2");
  add_switch(cmd, "--eleven-point", eleven_point,
             "11-point precision-recall interpolation");
  add_opt(cmd, "--out", out, "report path (default: stdout)");
  add_opt(cmd, "--config", config, "key=value file; entries override flags");
  add_opt(cmd, "--seed", seed, "RNG seed (unused here, echoed for parity)")
      ->envname("SDVC_SEED");
  if (!parse_command(&cmd, std::move(tokens))) return 0;
  std::vector<double> tolerances = parse_double_list(tol_csv, "--tolerances");
  std::vector<Label> drop = parse_labels(drop_csv, "--drop-labels");

  std::vector<GameDocument> docs = load_corpus_checked(gt, "eval-spotting");
  filter_corpus(&docs, drop);
  std::map<std::string, std::vector<GameClock>> gts;
  for (const GameDocument& doc : docs) {
    std::vector<GameClock>& clocks = gts[doc.game_id];
    for (const CaptionRecord& c : doc.captions) clocks.push_back(c.clock);
  }
  std::map<std::string, PredictionSet> sets = load_prediction_sets(pred);
  std::map<std::string, std::vector<SpotPrediction>> preds;
  long n_preds = 0;
  for (const auto& [id, set] : sets) {
    preds[id] = set.spots;
    n_preds += long(set.spots.size());
  }

  MatchOptions opts;
  opts.half_window = !wide_window;
  opts.all_point_interpolation = !eleven_point;
  std::map<double, double> map_at = map_at_deltas(preds, gts, tolerances, opts);

  ordered_json per_game = ordered_json::object();
  for (const auto& [id, clocks] : gts) {
    ordered_json row = ordered_json::object();
    auto it = preds.find(id);
    const std::vector<SpotPrediction> empty;
    const std::vector<SpotPrediction>& p =
        it == preds.end() ? empty : it->second;
    for (double tol : tolerances)
      row[tolerance_key(tol)] = round6(average_precision(p, clocks, tol, opts));
    per_game[id] = std::move(row);
  }

  ordered_json echo;
  echo["gt"] = gt;
  echo["pred"] = pred;
  echo["tolerances"] = tol_csv;
  echo["drop_labels"] = drop_csv;
  echo["half_window_matching"] = opts.half_window;
  echo["all_point_interpolation"] = opts.all_point_interpolation;
  echo["seed"] = seed;
  ordered_json result;
  ordered_json map_json = ordered_json::object();
  for (const auto& [tol, v] : map_at) map_json[tolerance_key(tol)] = round6(v);
  result["map_at"] = std::move(map_json);
  result["n_games"] = long(gts.size());
  result["n_predictions"] = n_preds;
  result["per_game"] = std::move(per_game);
  emit_report(out, "eval-spotting", echo, result);
  return 0;
}

// -------------------------------------------------------------- eval-caption

int cmd_eval_caption(std::vector<std::string> tokens) {
  CLI::App cmd{"Caption metrics over aligned candidate/reference pairs"};
  cmd.name("sdvc eval-caption");
  cmd.allow_extras(true);
  std::string pred, gt, out, config;
  uint64_t seed = 0;
  add_opt(cmd, "--pred", pred, "JSON array of candidate strings")->required();
  add_opt(cmd, "--gt", gt, "JSON array of reference-string arrays")
      ->required();
  add_opt(cmd, "--out", out, "report path (default: stdout)");
  add_opt(cmd, "--config", config, "key=value file; entries override flags");
  add_opt(cmd, "--seed", seed, "RNG seed (unused here, echoed for parity)")
      ->envname("SDVC_SEED");
  if (!parse_command(&cmd, std::move(tokens))) return 0;

  ordered_json pj, gj;
  try {
    pj = ordered_json::parse(slurp(pred));
    gj = ordered_json::parse(slurp(gt));
  } catch (const ordered_json::parse_error& e) {
    throw std::runtime_error(std::string("caption file: ") + e.what());
  }
  if (!pj.is_array() || !gj.is_array())
    throw std::runtime_error("--pred and --gt must hold JSON arrays");
  if (pj.size() != gj.size())
    throw std::runtime_error(
        "candidate/reference count mismatch: " + std::to_string(pj.size()) +
        " vs " + std::to_string(gj.size()));
  std::vector<ScoredPair> pairs;
  for (size_t i = 0; i < pj.size(); ++i) {
    if (!pj[i].is_string())
      throw std::runtime_error("candidate " + std::to_string(i) +
                               " is not a string");
    if (!gj[i].is_array() || gj[i].empty())
      throw std::runtime_error("candidate " + std::to_string(i) +
                               " needs a nonempty reference array");
    ScoredPair pair;
    pair.candidate = tokenize(pj[i].get<std::string>());
    for (const auto& r : gj[i]) {
      if (!r.is_string())
        throw std::runtime_error("reference for candidate " +
                                 std::to_string(i) + " is not a string");
      pair.references.push_back(tokenize(r.get<std::string>()));
    }
    pairs.push_back(std::move(pair));
  }

  MetricReport report = score_pairs(pairs);
  ordered_json echo;
  echo["pred"] = pred;
  echo["gt"] = gt;
  echo["seed"] = seed;
  ordered_json result = report.to_json();
  result["n_pairs"] = long(pairs.size());
  emit_report(out, "eval-caption", echo, result);
  return 0;
}

// ----------------------------------------------------------------- eval-sdvc

int cmd_eval_sdvc(std::vector<std::string> tokens) {
  CLI::App cmd{"Full task evaluation: spotting mAP, windowed caption metrics, "
               "tolerance-adapted story matching"};
  cmd.name("sdvc eval-sdvc");
  cmd.allow_extras(true);
  std::string gt, pred, out, config;
  std::string delta_csv = "30", tol_csv = "5,30,60", drop_csv;
  int text_field = 2;
  double window_halfwidth = 15.0;
  bool gt_averaged = false, wide_window = false, eleven_point = false;
  uint64_t seed = 0;
  add_opt(cmd, "--gt", gt, "directory of ground-truth game documents")
      ->required();
  add_opt(cmd, "--pred", pred, "prediction file or directory")->required();
  add_opt(cmd, "--deltas", delta_csv, "caption matching tolerances in seconds");
  add_opt(cmd, "--tolerances", tol_csv, "spotting tolerances in seconds");
  add_opt(cmd, "--text-field", text_field,
          "reference text: 0 original, 1 identified, 2 anonymized");
  add_opt(cmd, "--window-halfwidth", window_halfwidth,
          "story-matching interval half-width in seconds");
  add_opt(cmd, "--drop-labels", drop_csv,
          "labels removed from the ground truth before scoring");
  add_switch(cmd, "--gt-averaged", gt_averaged,
             "average windowed scores over ground-truth captions");
  add_switch(cmd, "--wide-window", wide_window,
             "spotting match within |dt| <= tolerance");
  add_switch(cmd, "--eleven-point", eleven_point,
             "11-point precision-recall interpolation");
  add_opt(cmd, "--out", out, "report path (default: stdout)");
  add_opt(cmd, "--config", config, "key=value file; entries override flags");
  add_opt(cmd, "--seed", seed, "RNG seed (unused here, echoed for parity)")
      ->envname("SDVC_SEED");
  if (!parse_command(&cmd, std::move(tokens))) return 0;
  std::vector<double> deltas = parse_double_list(delta_csv, "--deltas");
  std::vector<double> tolerances = parse_double_list(tol_csv, "--tolerances");
  if (text_field < 0 || text_field > 2)
    throw UsageError("--text-field must be 0, 1, or 2");
  std::vector<Label> drop = parse_labels(drop_csv, "--drop-labels");

  std::vector<GameDocument> docs = load_corpus_checked(gt, "eval-sdvc");
  filter_corpus(&docs, drop);
  std::map<std::string, std::vector<CaptionRecord>> gts;
  for (GameDocument& doc : docs) gts[doc.game_id] = std::move(doc.captions);
  std::map<std::string, PredictionSet> preds = load_prediction_sets(pred);

  SdvcConfig cfg;
  cfg.window_halfwidth = window_halfwidth;
  cfg.gt_averaged = gt_averaged;
  cfg.text_field = text_field;
  cfg.spotting.half_window = !wide_window;
  cfg.spotting.all_point_interpolation = !eleven_point;
  SdvcReport report = evaluate_sdvc(preds, gts, cfg, tolerances, deltas);

  ordered_json echo;
  echo["gt"] = gt;
  echo["pred"] = pred;
  echo["deltas"] = delta_csv;
  echo["tolerances"] = tol_csv;
  echo["drop_labels"] = drop_csv;
  echo["seed"] = seed;
  emit_report(out, "eval-sdvc", echo, report.to_json());
  return 0;
}

// --------------------------------------------------------------------- train

struct TrainFlags {
  std::string task, corpus, features, split, out, config;
  std::string kind = "netvlad++";
  std::string drop_csv = "fun fact,attendance";
  std::string transfer_path, transfer_mode = "fine-tuned";
  int clusters = 64, feature_dim = 0, text_field = 2, min_count = 5;
  int hidden = 512, embed = 256, layers = 1;
  double dropout = 0.4;
  TrainConfig cfg;
};

void add_train_options(CLI::App& cmd, TrainFlags& f) {
  add_opt(cmd, "--task", f.task, "spotting or captioning")->required();
  add_opt(cmd, "--corpus", f.corpus, "directory of game documents")
      ->required();
  add_opt(cmd, "--features", f.features,
          "directory of {game_id}.{1,2}.snf feature files")
      ->required();
  add_opt(cmd, "--split", f.split, "train/valid/test manifest")->required();
  add_opt(cmd, "--out", f.out, "output directory")->required();
  add_opt(cmd, "--kind", f.kind,
          "aggregator: netvlad, netrvlad, netvlad++, netrvlad++");
  add_opt(cmd, "--clusters", f.clusters, "aggregator cluster count");
  add_opt(cmd, "--feature-dim", f.feature_dim,
          "expected feature width (0 accepts the files' width)");
  add_opt(cmd, "--drop-labels", f.drop_csv,
          "labels removed before training");
  add_opt(cmd, "--text-field", f.text_field,
          "caption text: 0 original, 1 identified, 2 anonymized");
  add_opt(cmd, "--min-count", f.min_count, "vocabulary frequency threshold");
  add_opt(cmd, "--hidden", f.hidden, "decoder hidden size");
  add_opt(cmd, "--embed", f.embed, "decoder embedding size");
  add_opt(cmd, "--layers", f.layers, "decoder LSTM layers");
  add_opt(cmd, "--dropout", f.dropout, "decoder dropout rate");
  add_opt(cmd, "--transfer", f.transfer_path,
          "checkpoint whose aggregator seeds this run");
  add_opt(cmd, "--transfer-mode", f.transfer_mode, "frozen or fine-tuned");
  add_opt(cmd, "--lr", f.cfg.lr_init, "initial learning rate");
  add_opt(cmd, "--lr-factor", f.cfg.lr_factor, "plateau division factor");
  add_opt(cmd, "--patience", f.cfg.plateau_patience,
          "epochs without improvement before reducing the rate");
  add_opt(cmd, "--lr-stop", f.cfg.lr_stop, "stop once the rate falls below");
  add_opt(cmd, "--max-epochs", f.cfg.max_epochs, "epoch cap");
  add_opt(cmd, "--chunk-seconds", f.cfg.chunk_seconds,
          "spotting window length");
  add_opt(cmd, "--caption-window", f.cfg.caption_window_seconds,
          "clip length around each caption anchor");
  add_opt(cmd, "--nms-seconds", f.cfg.nms_seconds, "suppression window");
  add_opt(cmd, "--teacher-forcing", f.cfg.teacher_forcing_ratio,
          "probability of feeding the gold token");
  add_opt(cmd, "--seed", f.cfg.seed, "RNG seed")->envname("SDVC_SEED");
  add_opt(cmd, "--config", f.config,
          "key=value file; entries override flags");
}

ordered_json train_echo(const TrainFlags& f) {
  ordered_json echo;
  echo["task"] = f.task;
  echo["corpus"] = f.corpus;
  echo["features"] = f.features;
  echo["split"] = f.split;
  echo["out"] = f.out;
  echo["kind"] = f.kind;
  echo["clusters"] = f.clusters;
  echo["feature_dim"] = f.feature_dim;
  echo["drop_labels"] = f.drop_csv;
  echo["text_field"] = f.text_field;
  echo["min_count"] = f.min_count;
  echo["hidden"] = f.hidden;
  echo["embed"] = f.embed;
  echo["layers"] = f.layers;
  echo["dropout"] = f.dropout;
  echo["transfer"] = f.transfer_path;
  echo["transfer_mode"] = f.transfer_path.empty() ? "scratch" : f.transfer_mode;
  ordered_json cfg_json = f.cfg.to_json();
  for (auto& [key, value] : cfg_json.items()) echo[key] = value;
  return echo;
}

int cmd_train(std::vector<std::string> tokens) {
  CLI::App cmd{"Train the spotting or captioning model"};
  cmd.name("sdvc train");
  cmd.allow_extras(true);
  TrainFlags f;
  add_train_options(cmd, f);
  if (!parse_command(&cmd, std::move(tokens))) return 0;
  if (f.task != "spotting" && f.task != "captioning")
    throw UsageError("--task must be spotting or captioning");
  if (f.text_field < 0 || f.text_field > 2)
    throw UsageError("--text-field must be 0, 1, or 2");
  AggregatorKind kind;
  try {
    kind = aggregator_kind_from_name(f.kind);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  std::vector<Label> drop = parse_labels(f.drop_csv, "--drop-labels");
  TransferMode mode;
  if (f.transfer_mode == "frozen")
    mode = TransferMode::Frozen;
  else if (f.transfer_mode == "fine-tuned")
    mode = TransferMode::FineTuned;
  else
    throw UsageError("--transfer-mode must be frozen or fine-tuned");

  std::vector<GameDocument> docs = load_corpus_checked(f.corpus, "train");
  FilterOutcome outcome = filter_corpus(&docs, drop);
  SplitManifest split = SplitManifest::load(f.split);
  validate_split(split);
  std::map<std::string, const GameDocument*> by_id;
  for (const GameDocument& doc : docs) by_id[doc.game_id] = &doc;
  auto pick = [&](const std::vector<std::string>& ids) {
    std::vector<const GameDocument*> out;
    for (const std::string& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end())
        throw std::runtime_error("split references unknown game \"" + id +
                                 "\"");
      out.push_back(it->second);
    }
    return out;
  };
  std::vector<const GameDocument*> train_docs = pick(split.train);
  std::vector<const GameDocument*> valid_docs = pick(split.valid);

  int locked_dim = f.feature_dim;
  auto features_of = [&](const GameDocument& doc) {
    return load_game_features(f.features, doc.game_id, &locked_dim);
  };

  // Aggregator hand-off from an earlier run; the sidecar says which model
  // family the checkpoint holds.
  TransferSpec transfer;
  AggregatorParams transfer_agg;
  if (!f.transfer_path.empty()) {
    ordered_json side;
    try {
      side = ordered_json::parse(slurp(f.transfer_path + ".json"));
    } catch (const ordered_json::parse_error& e) {
      throw std::runtime_error(f.transfer_path + ".json: " + e.what());
    }
    std::string family = side.at("model").get<std::string>();
    if (family == "spotting")
      transfer_agg = load_spotting_model(f.transfer_path).agg;
    else if (family == "captioning")
      transfer_agg = load_captioning_model(f.transfer_path).agg;
    else
      throw std::runtime_error(f.transfer_path +
                               ".json: unknown model family " + family);
    transfer.source = &transfer_agg;
    transfer.mode = mode;
  }

  std::error_code ec;
  fs::create_directories(f.out, ec);
  ordered_json result;
  result["task"] = f.task;
  result["filtered"] = filter_json(outcome);
  const std::string ckpt = f.out + "/model.ckpt";
  TrainLog log;

  if (f.task == "spotting") {
    auto games_of = [&](const std::vector<const GameDocument*>& picked) {
      std::vector<SpottingGame> games;
      for (const GameDocument* doc : picked) {
        SpottingGame g;
        std::vector<HalfFeatures> halves = features_of(*doc);
        g.halves = {std::move(halves[0]), std::move(halves[1])};
        for (const CaptionRecord& c : doc->captions)
          g.anchors[c.clock.half - 1].push_back(c.clock.seconds);
        games.push_back(std::move(g));
      }
      return games;
    };
    std::vector<SpottingGame> train_games = games_of(train_docs);
    std::vector<SpottingGame> valid_games = games_of(valid_docs);
    SpottingTrainResult trained = spotting_train(train_games, valid_games,
                                                 kind, f.clusters, f.cfg,
                                                 transfer);
    save_spotting_model(ckpt, trained.model, f.cfg);
    log = std::move(trained.log);
    result["n_train_games"] = long(train_games.size());
    result["n_valid_games"] = long(valid_games.size());
  } else {
    std::vector<std::vector<std::string>> sentences;
    for (const GameDocument* doc : train_docs)
      for (const CaptionRecord& c : doc->captions)
        sentences.push_back(tokenize(c.text(f.text_field)));
    Vocabulary vocab = Vocabulary::build(sentences, f.min_count);
    vocab.save(f.out + "/vocab.txt");

    long skipped = 0;
    auto examples_of = [&](const std::vector<const GameDocument*>& picked) {
      std::vector<CaptionExample> examples;
      for (const GameDocument* doc : picked) {
        std::vector<HalfFeatures> halves = features_of(*doc);
        for (const CaptionRecord& c : doc->captions) {
          const HalfFeatures& half = halves[c.clock.half - 1];
          if (half.frames.rows() == 0) {
            ++skipped;
            continue;
          }
          CaptionExample ex;
          ex.clip = trim_clip(half, c.clock.seconds,
                              f.cfg.caption_window_seconds);
          ex.tokens = vocab.encode(tokenize(c.text(f.text_field)));
          examples.push_back(std::move(ex));
        }
      }
      return examples;
    };
    std::vector<CaptionExample> train_ex = examples_of(train_docs);
    std::vector<CaptionExample> valid_ex = examples_of(valid_docs);

    ModelDims dims;
    dims.hidden = f.hidden;
    dims.embed = f.embed;
    dims.layers = f.layers;
    dims.dropout = f.dropout;
    CaptionTrainResult trained =
        caption_train(train_ex, valid_ex, kind, f.clusters, vocab.size(),
                      dims, f.cfg, transfer);
    save_captioning_model(ckpt, trained.model, f.cfg, vocab.fingerprint());
    log = std::move(trained.log);
    result["n_train_examples"] = long(train_ex.size());
    result["n_valid_examples"] = long(valid_ex.size());
    result["n_skipped_empty_halves"] = skipped;
    result["vocab_size"] = vocab.size();
    result["forced_steps"] = trained.forced_steps;
    result["free_steps"] = trained.free_steps;
  }

  write_file(f.out + "/train_log.csv", log.to_csv());
  int epochs = 0;
  double final_train = 0.0, final_valid = 0.0;
  bool saw_train = false, saw_valid = false;
  for (const TrainLogRow& row : log.rows) {
    epochs = std::max(epochs, row.epoch);
    if (row.split == "train") {
      final_train = row.loss;
      saw_train = true;
    } else if (row.split == "valid") {
      final_valid = row.loss;
      saw_valid = true;
    }
  }
  result["feature_dim"] = locked_dim;
  result["epochs"] = epochs;
  if (saw_train) result["final_train_loss"] = final_train;
  if (saw_valid) result["final_valid_loss"] = final_valid;
  ordered_json artifacts;
  artifacts["model"] = ckpt;
  artifacts["log"] = f.out + "/train_log.csv";
  if (f.task == "captioning") artifacts["vocab"] = f.out + "/vocab.txt";
  result["artifacts"] = std::move(artifacts);

  emit_report(f.out + "/report.json", "train", train_echo(f), result);
  std::cerr << "train: " << f.task << " finished after " << epochs
            << " epoch(s) -> " << ckpt << "\n";
  return 0;
}

// --------------------------------------------------------------------- infer

int cmd_infer(std::vector<std::string> tokens) {
  CLI::App cmd{"Run the two-stage pipeline and write per-game predictions"};
  cmd.name("sdvc infer");
  cmd.allow_extras(true);
  std::string features, spot_path, capt_path, vocab_path, games_csv, split_path;
  std::string split_list = "test", out, config;
  int feature_dim = 0;
  double chunk_seconds = 0.0, nms_seconds = 0.0, caption_window = 0.0;
  uint64_t seed = 0;
  add_opt(cmd, "--features", features,
          "directory of {game_id}.{1,2}.snf feature files")
      ->required();
  add_opt(cmd, "--spot", spot_path, "spotting checkpoint")->required();
  add_opt(cmd, "--caption", capt_path, "captioning checkpoint")->required();
  add_opt(cmd, "--vocab", vocab_path, "vocabulary file")->required();
  add_opt(cmd, "--games", games_csv, "comma-separated game ids");
  add_opt(cmd, "--split", split_path,
          "manifest supplying the ids when --games is absent");
  add_opt(cmd, "--split-list", split_list, "train, valid, or test");
  add_opt(cmd, "--out", out, "output directory")->required();
  CLI::Option* chunk_opt =
      add_opt(cmd, "--chunk-seconds", chunk_seconds,
              "override the checkpoint's spotting window");
  CLI::Option* nms_opt = add_opt(cmd, "--nms-seconds", nms_seconds,
                                 "override the checkpoint's suppression window");
  CLI::Option* window_opt =
      add_opt(cmd, "--caption-window", caption_window,
              "override the checkpoint's caption clip length");
  add_opt(cmd, "--feature-dim", feature_dim,
          "expected feature width (0 accepts the files' width)");
  add_opt(cmd, "--config", config, "key=value file; entries override flags");
  add_opt(cmd, "--seed", seed, "RNG seed (unused here, echoed for parity)")
      ->envname("SDVC_SEED");
  if (!parse_command(&cmd, std::move(tokens))) return 0;

  std::vector<std::string> ids = split_commas(games_csv);
  if (ids.empty()) {
    if (split_path.empty())
      throw UsageError("provide --games or a --split manifest");
    SplitManifest split = SplitManifest::load(split_path);
    validate_split(split);
    if (split_list == "train")
      ids = split.train;
    else if (split_list == "valid")
      ids = split.valid;
    else if (split_list == "test")
      ids = split.test;
    else
      throw UsageError("--split-list must be train, valid, or test");
  }
  if (ids.empty()) throw std::runtime_error("no games to run inference on");

  TrainConfig spot_cfg, capt_cfg;
  uint64_t fingerprint = 0;
  SpottingModel spot = load_spotting_model(spot_path, &spot_cfg);
  CaptioningModel capt =
      load_captioning_model(capt_path, &capt_cfg, &fingerprint);
  Vocabulary vocab = Vocabulary::load(vocab_path);
  if (vocab.fingerprint() != fingerprint)
    throw std::runtime_error(
        "vocabulary fingerprint mismatch: " + vocab_path +
        " is not the vocabulary this checkpoint was trained with");

  double chunk = chunk_opt->count() > 0 ? chunk_seconds : spot_cfg.chunk_seconds;
  double nms_win = nms_opt->count() > 0 ? nms_seconds : spot_cfg.nms_seconds;
  double window = window_opt->count() > 0 ? caption_window
                                          : capt_cfg.caption_window_seconds;

  std::error_code ec;
  fs::create_directories(out, ec);
  int locked_dim = feature_dim;
  ordered_json games = ordered_json::array();
  long total = 0;
  for (const std::string& id : ids) {
    std::vector<HalfFeatures> halves =
        load_game_features(features, id, &locked_dim);
    PredictionSet set =
        sdvc_infer(id, halves, spot, capt, vocab, chunk, nms_win, window);
    ordered_json pj = prediction_set_to_json(set);
    std::vector<std::string> errs = schema_violations(predictions_schema(), pj);
    if (!errs.empty())
      throw std::logic_error("internal: prediction file fails its schema: " +
                             errs.front());
    write_file(out + "/" + id + ".json", pj.dump(2) + "\n");
    total += long(set.spots.size());
    ordered_json row;
    row["game_id"] = id;
    row["n_predictions"] = long(set.spots.size());
    games.push_back(std::move(row));
  }

  ordered_json echo;
  echo["features"] = features;
  echo["spot"] = spot_path;
  echo["caption"] = capt_path;
  echo["vocab"] = vocab_path;
  echo["out"] = out;
  echo["chunk_seconds"] = chunk;
  echo["nms_seconds"] = nms_win;
  echo["caption_window_seconds"] = window;
  echo["feature_dim"] = feature_dim;
  echo["seed"] = seed;
  ordered_json result;
  result["n_games"] = long(ids.size());
  result["n_predictions"] = total;
  result["games"] = std::move(games);
  emit_report(out + "/_report.json", "infer", echo, result);
  std::cerr << "infer: " << total << " prediction(s) across " << ids.size()
            << " game(s) -> " << out << "\n";
  return 0;
}

// ------------------------------------------------------------------ selftest

void require(bool ok, const std::string& detail) {
  if (!ok) throw std::runtime_error(detail);
}

int cmd_selftest(std::vector<std::string> tokens) {
  CLI::App cmd{"Quick built-in sanity checks"};
  cmd.name("sdvc selftest");
  cmd.allow_extras(true);
  std::string out, config;
  uint64_t seed = 0;
  add_opt(cmd, "--out", out, "report path (default: stdout)");
  add_opt(cmd, "--config", config, "key=value file; entries override flags");
  add_opt(cmd, "--seed", seed, "RNG seed for the gradient spot check")
      ->envname("SDVC_SEED");
  if (!parse_command(&cmd, std::move(tokens))) return 0;

  using Check = std::pair<std::string, std::function<void()>>;
  std::vector<Check> checks;

  checks.emplace_back("game clock round-trip", [] {
    GameClock c = parse_game_clock("2 - 12:34");
    require(c.half == 2 && c.seconds == 754.0, "parse of '2 - 12:34'");
    require(format_game_clock(c) == "2 - 12:34", "format round-trip");
  });

  checks.emplace_back("suppression keeps the confidence peak", [] {
    std::vector<SpotPrediction> spots;
    spots.push_back({GameClock{1, 100.0}, 0.4, ""});
    spots.push_back({GameClock{1, 110.0}, 0.9, ""});
    spots.push_back({GameClock{1, 125.0}, 0.5, ""});
    spots.push_back({GameClock{1, 300.0}, 0.3, ""});
    std::vector<SpotPrediction> once = nms(spots, 30.0);
    require(once.size() == 2, "expected two survivors");
    require(once[0].clock.seconds == 110.0 && once[1].clock.seconds == 300.0,
            "wrong survivors");
    std::vector<SpotPrediction> twice = nms(once, 30.0);
    require(twice.size() == once.size(), "not idempotent");
  });

  checks.emplace_back("identity spotting scores perfect AP", [] {
    std::vector<GameClock> gts = {GameClock{1, 10.0}, GameClock{1, 50.0},
                                  GameClock{2, 200.0}};
    std::vector<SpotPrediction> preds;
    for (const GameClock& g : gts) preds.push_back({g, 1.0, ""});
    for (double tol : {5.0, 30.0, 60.0})
      require(average_precision(preds, gts, tol) == 1.0,
              "AP != 1 at tolerance " + std::to_string(tol));
  });

  checks.emplace_back("identity captions score 1.0 overlap metrics", [] {
    std::vector<CaptionRecord> gts(2);
    gts[0].clock = GameClock{1, 30.0};
    gts[0].text_anonymized = "the keeper holds on to the ball";
    gts[1].clock = GameClock{1, 300.0};
    gts[1].text_anonymized = "a corner swung in deep towards the far post";
    PredictionSet preds;
    preds.game_id = "selftest";
    for (const CaptionRecord& c : gts)
      preds.spots.push_back({c.clock, 1.0, c.text_anonymized});
    SdvcConfig cfg;
    require(windowed_metric(preds, gts, cfg, CaptionMetric::Bleu4) == 1.0,
            "windowed BLEU@4 != 1");
    require(windowed_metric(preds, gts, cfg, CaptionMetric::RougeL) == 1.0,
            "windowed ROUGE-L != 1");
    double soda = soda_c_windowed(preds, gts, cfg);
    require(soda > 0.99 && soda <= 1.0,
            "story matching on identical sides: " + std::to_string(soda));
    PredictionSet empty_preds;
    empty_preds.game_id = "selftest";
    std::vector<CaptionRecord> empty_gts;
    require(soda_c_windowed(empty_preds, empty_gts, cfg) == 1.0,
            "both-empty convention");
  });

  checks.emplace_back("common-subsequence length matches the recursion", [] {
    TokenList a = {"the", "ball", "runs", "out", "for", "a", "corner"};
    TokenList b = {"ball", "out", "for", "the", "corner"};
    std::function<size_t(size_t, size_t)> rec = [&](size_t i, size_t j) {
      if (i == a.size() || j == b.size()) return size_t(0);
      if (a[i] == b[j]) return 1 + rec(i + 1, j + 1);
      return std::max(rec(i + 1, j), rec(i, j + 1));
    };
    require(lcs_length(a, b) == rec(0, 0), "LCS disagreement");
  });

  uint64_t grad_seed = seed;
  checks.emplace_back("gradient spot check against finite differences",
                      [grad_seed] {
    std::mt19937 rng(uint32_t(grad_seed) ^ 0x5eed5u);
    SpottingModel m = init_spotting_model(AggregatorKind::NetRVLAD, 2, 3, rng);
    Mat clip(4, 3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 3; ++c) clip(r, c) = gauss(rng);
    SpottingModel grads = zeros_like(m);
    spotting_loss(clip, true, m, &grads);
    const double h = 1e-5;
    double saved = m.head.w(0, 0);
    m.head.w(0, 0) = saved + h;
    double up = spotting_loss(clip, true, m, nullptr);
    m.head.w(0, 0) = saved - h;
    double down = spotting_loss(clip, true, m, nullptr);
    m.head.w(0, 0) = saved;
    double numeric = (up - down) / (2 * h);
    double analytic = grads.head.w(0, 0);
    double rel = std::abs(analytic - numeric) /
                 std::max({std::abs(analytic), std::abs(numeric), 1e-3});
    require(rel < 1e-4, "rel err " + std::to_string(rel));
  });

  checks.emplace_back("report schema accepts and rejects correctly", [] {
    ordered_json good;
    good["command"] = "selftest";
    good["config"] = ordered_json::object();
    good["result"] = ordered_json::object();
    require(schema_violations(report_schema(), good).empty(),
            "valid report rejected");
    ordered_json bad = good;
    bad.erase("result");
    require(!schema_violations(report_schema(), bad).empty(),
            "missing key accepted");
    ordered_json wrong = good;
    wrong["command"] = "not-a-command";
    require(!schema_violations(report_schema(), wrong).empty(),
            "unknown command accepted");
  });

  checks.emplace_back("prediction files round-trip", [] {
    PredictionSet set;
    set.game_id = "selftest";
    set.spots.push_back({GameClock{1, 62.0}, 0.75, "a shot from distance"});
    set.spots.push_back({GameClock{2, 500.0}, 0.25, ""});
    ordered_json pj = prediction_set_to_json(set);
    require(schema_violations(predictions_schema(), pj).empty(),
            "prediction json fails its schema");
    PredictionSet back = parse_prediction_set(pj.dump());
    require(back.game_id == set.game_id && back.spots.size() == 2,
            "round-trip shape");
    require(back.spots[0].clock == set.spots[0].clock &&
                back.spots[0].confidence == 0.75 &&
                back.spots[0].comment == "a shot from distance",
            "round-trip content");
  });

  checks.emplace_back("vocabulary encode/decode round-trip", [] {
    std::vector<std::vector<std::string>> sentences = {
        {"goal", "for", "the", "visitors"}, {"goal", "kick", "for", "them"}};
    Vocabulary vocab = Vocabulary::build(sentences, 1);
    std::vector<std::string> words = {"goal", "for", "them"};
    std::vector<int> ids = vocab.encode(words);
    require(ids.front() == Vocabulary::kBos && ids.back() == Vocabulary::kEos,
            "BOS/EOS framing");
    require(vocab.decode(ids) == words, "decode mismatch");
  });

  checks.emplace_back("label filter removes exactly the dropped labels", [] {
    GameDocument doc;
    doc.game_id = "selftest";
    doc.captions.resize(3);
    doc.captions[0].label = Label::SoccerBall;
    doc.captions[1].label = Label::FunFact;
    doc.captions[2].label = Label::Attendance;
    std::vector<GameDocument> docs = {doc};
    std::vector<Label> drop = {Label::FunFact, Label::Attendance};
    FilterOutcome outcome = filter_corpus(&docs, drop);
    require(outcome.removed == 2 && docs[0].captions.size() == 1,
            "wrong removal count");
    FilterOutcome noop = filter_corpus(&docs, {});
    require(noop.removed == 0 && docs[0].captions.size() == 1,
            "empty drop list must be a no-op");
  });

  ordered_json rows = ordered_json::array();
  int failed = 0;
  for (const Check& check : checks) {
    ordered_json row;
    row["name"] = check.first;
    try {
      check.second();
      row["ok"] = true;
      std::cerr << "ok - " << check.first << "\n";
    } catch (const std::exception& e) {
      row["ok"] = false;
      row["detail"] = e.what();
      ++failed;
      std::cerr << "FAIL - " << check.first << ": " << e.what() << "\n";
    }
    rows.push_back(std::move(row));
  }
  std::cerr << "selftest: " << (checks.size() - size_t(failed)) << "/"
            << checks.size() << " check(s) passed\n";

  ordered_json echo;
  echo["seed"] = seed;
  ordered_json result;
  result["n_checks"] = long(checks.size());
  result["n_failed"] = failed;
  result["checks"] = std::move(rows);
  emit_report(out, "selftest", echo, result);
  return failed == 0 ? 0 : 1;
}

// ------------------------------------------------------------------ dispatch

struct CommandEntry {
  const char* name;
  const char* blurb;
  int (*fn)(std::vector<std::string>);
};

constexpr CommandEntry kCommands[] = {
    {"validate", "check game documents against the format invariants",
     &cmd_validate},
    {"stats", "corpus statistics", &cmd_stats},
    {"anonymize", "rewrite caption entity mentions", &cmd_anonymize},
    {"eval-spotting", "spotting mAP against caption anchors",
     &cmd_eval_spotting},
    {"eval-caption", "caption metrics over aligned pairs", &cmd_eval_caption},
    {"eval-sdvc", "full task evaluation", &cmd_eval_sdvc},
    {"train", "train the spotting or captioning model", &cmd_train},
    {"infer", "run the two-stage pipeline", &cmd_infer},
    {"selftest", "quick built-in sanity checks", &cmd_selftest},
};

std::string usage_text() {
  std::ostringstream out;
  out << "usage: sdvc <command> [flags]\n\ncommands:\n";
  for (const CommandEntry& c : kCommands)
    out << "  " << c.name << std::string(16 - std::string(c.name).size(), ' ')
        << c.blurb << "\n";
  out << "\nrun `sdvc <command> --help` for that command's flags\n";
  return out.str();
}

}  // namespace

int run(const std::vector<std::string>& args) {
  try {
    if (args.empty()) {
      std::cerr << usage_text();
      return 2;
    }
    const std::string& name = args[0];
    if (name == "--help" || name == "-h" || name == "help") {
      std::cout << usage_text();
      return 0;
    }
    for (const CommandEntry& c : kCommands)
      if (name == c.name)
        return c.fn(std::vector<std::string>(args.begin() + 1, args.end()));
    std::string best;
    size_t best_d = std::string::npos;
    for (const CommandEntry& c : kCommands) {
      size_t d = edit_distance(name, c.name);
      if (d < best_d) {
        best_d = d;
        best = c.name;
      }
    }
    std::cerr << "unknown command '" << name << "'";
    if (best_d <= 3) std::cerr << " (did you mean '" << best << "'?)";
    std::cerr << "\n\n" << usage_text();
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: invalid document";
    if (!e.report().errors.empty())
      std::cerr << ": " << e.report().errors.front().path << ": "
                << e.report().errors.front().message;
    std::cerr << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace sdvc
