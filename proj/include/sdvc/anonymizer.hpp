#pragma once

#include <string>
#include <vector>

#include "sdvc/document.hpp"

namespace sdvc {

enum class EntityKind { Team, Coach, Referee, Player };

std::string entity_kind_name(EntityKind kind);

struct EntityEntry {
  std::vector<std::string> surface_forms;  // longest first
  EntityKind kind = EntityKind::Player;
  std::string uid;  // players always; overrides may carry one
  int team = -1;    // 0 home, 1 away, -1 not team-bound (referee)
};

struct EntityIndex {
  std::vector<EntityEntry> entries;
  // Literal text span -> forced entry (applied before the exact tier).
  std::vector<std::pair<std::string, EntityEntry>> overrides;
};

// Collects team names, coach and referee full names and surnames, and player
// full names and surnames from the lineups. Surnames shared between entries
// stay in the index; anonymize() disambiguates at match time.
EntityIndex build_entity_index(const GameDocument& doc);

// Sidecar format: JSON object mapping literal span -> {"kind": ..., "uid": ...}.
void load_overrides(EntityIndex* index, const std::string& path);

// Similarity in [0,1]: 1 - normalized Levenshtein distance after case and
// diacritic folding. 1.0 iff the folded strings are equal.
double fuzzy_match(std::string_view candidate, std::string_view surface);

inline constexpr double kFuzzyApplyThreshold = 0.85;
inline constexpr double kFuzzyReportThreshold = 0.60;

struct UnresolvedSpan {
  size_t byte_offset = 0;
  std::string text;     // surface as it appears in the input
  std::string matched;  // index surface form it resembles
  double score = 0.0;
  bool applied = false;  // true when the fuzzy tier rewrote the span
  std::string reason;    // "fuzzy" or "ambiguous"
};

struct AnonymizeResult {
  std::string identified;  // [Player_uid] / [TEAM] / [COACH] / [REFEREE]
  std::string anonymized;  // [PLAYER] / [TEAM] / [COACH] / [REFEREE]
  std::vector<UnresolvedSpan> unresolved;
};

// Longest-match, left-to-right, non-overlapping replacement. Existing [Tag]
// tokens are never re-matched, so the function is idempotent. Ambiguous
// surnames resolve to the entry whose team is mentioned nearest in the same
// sentence; when that fails the span is left unchanged in both outputs and
// reported.
AnonymizeResult anonymize(std::string_view text, const EntityIndex& index);

// Rewrites identified/anonymized fields from text_original for every caption.
// Returns the per-caption unresolved spans keyed by caption position.
std::vector<std::vector<UnresolvedSpan>> anonymize_document(
    GameDocument* doc, const EntityIndex& index);

}  // namespace sdvc
