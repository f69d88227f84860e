#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdvc/document.hpp"

namespace sdvc {

// Train/valid/test game-id lists, loaded from a JSON object with those three
// keys. The three lists must be disjoint and train must be nonempty.
struct SplitManifest {
  std::vector<std::string> train;
  std::vector<std::string> valid;
  std::vector<std::string> test;

  static SplitManifest parse(std::string_view bytes);
  static SplitManifest load(const std::string& path);
  ordered_json to_json() const;
};

// Throws std::runtime_error naming the offending id / list on violation.
void validate_split(const SplitManifest& split);

struct FilterOutcome {
  long removed = 0;
  std::map<std::string, long> by_label;  // label name -> captions removed
};

// Removes every caption whose label is in drop_labels, in place.
FilterOutcome filter_corpus(std::vector<GameDocument>* docs,
                            const std::vector<Label>& drop_labels);

// Loads every *.json game document directly under dir, sorted by filename.
// Files whose names start with '_' are skipped: that prefix marks tool
// reports living alongside rewritten documents. Parse errors throw; document
// invariant violations accumulate into `report` when given and throw
// otherwise.
std::vector<GameDocument> load_corpus_dir(const std::string& dir,
                                          ValidationReport* report = nullptr);

// Command-line entry point; args excludes the program name. Returns the
// process exit status: 0 success, 1 validation or data failure, 2 usage
// error (unknown command, unknown flag, malformed value).
int run(const std::vector<std::string>& args);

}  // namespace sdvc
