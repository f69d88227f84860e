#include "sdvc/anonymizer.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "sdvc/text.hpp"

namespace sdvc {

std::string entity_kind_name(EntityKind kind) {
  switch (kind) {
    case EntityKind::Team: return "TEAM";
    case EntityKind::Coach: return "COACH";
    case EntityKind::Referee: return "REFEREE";
    default: return "PLAYER";
  }
}

namespace {

EntityKind kind_from_name(const std::string& s) {
  if (s == "TEAM") return EntityKind::Team;
  if (s == "COACH") return EntityKind::Coach;
  if (s == "REFEREE") return EntityKind::Referee;
  if (s == "PLAYER") return EntityKind::Player;
  throw std::runtime_error("unknown entity kind \"" + s + "\"");
}

void add_person(std::vector<EntityEntry>* entries, const std::string& name,
                EntityKind kind, std::string uid, int team) {
  if (name.empty()) return;
  EntityEntry e;
  e.surface_forms.push_back(name);
  std::string last = surname_of(name);
  if (!last.empty()) e.surface_forms.push_back(last);
  e.kind = kind;
  e.uid = std::move(uid);
  e.team = team;
  entries->push_back(std::move(e));
}

}  // namespace

EntityIndex build_entity_index(const GameDocument& doc) {
  EntityIndex index;
  for (int t = 0; t < 2; ++t) {
    const TeamSheet& team = doc.teams[t];
    if (!team.name.empty()) {
      EntityEntry e;
      e.surface_forms.push_back(team.name);
      e.kind = EntityKind::Team;
      e.team = t;
      index.entries.push_back(std::move(e));
    }
    add_person(&index.entries, team.coach, EntityKind::Coach, "", t);
    for (const Player& p : team.players)
      add_person(&index.entries, p.name, EntityKind::Player, p.uid, t);
  }
  add_person(&index.entries, doc.referee, EntityKind::Referee, "", -1);
  return index;
}

void load_overrides(EntityIndex* index, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open overrides file " + path);
  ordered_json root = ordered_json::parse(in);
  if (!root.is_object())
    throw std::runtime_error(path + ": overrides must be a JSON object");
  for (auto& [span, val] : root.items()) {
    if (span.empty() || !val.is_object())
      throw std::runtime_error(path + ": bad override for \"" + span + "\"");
    EntityEntry e;
    e.surface_forms.push_back(span);
    e.kind = kind_from_name(val.value("kind", "PLAYER"));
    e.uid = val.value("uid", "");
    index->overrides.emplace_back(span, std::move(e));
  }
}

double fuzzy_match(std::string_view candidate, std::string_view surface) {
  std::string fa = fold(candidate);
  std::string fb = fold(surface);
  if (fa == fb) return 1.0;
  size_t la = decode_utf8(fa).size();
  size_t lb = decode_utf8(fb).size();
  size_t dist = edit_distance(fa, fb);
  return 1.0 - double(dist) / double(std::max<size_t>(1, std::max(la, lb)));
}

namespace {

struct Match {
  TextSpan span;
  int tier = 1;  // 0 override, 1 exact, 2 fuzzy
  double score = 1.0;
  const EntityEntry* entry = nullptr;  // null when ambiguous
  std::string surface;
  bool ambiguous = false;
};

std::string identified_token(const EntityEntry& e) {
  if (e.kind == EntityKind::Player && !e.uid.empty())
    return "[Player_" + e.uid + "]";
  return "[" + entity_kind_name(e.kind) + "]";
}

std::string generic_token(const EntityEntry& e) {
  return "[" + entity_kind_name(e.kind) + "]";
}

// Identity key used to tell real ambiguity from the same entity reached
// through two routes.
std::string entry_identity(const EntityEntry& e) {
  return entity_kind_name(e.kind) + "|" + e.uid + "|" + std::to_string(e.team) +
         "|" + (e.surface_forms.empty() ? "" : e.surface_forms.front());
}

}  // namespace

AnonymizeResult anonymize(std::string_view text, const EntityIndex& index) {
  AnonymizeResult result;
  std::vector<Codepoint> cps = decode_utf8(text);
  if (cps.empty()) {
    result.identified = std::string(text);
    result.anonymized = std::string(text);
    return result;
  }
  std::vector<uint32_t> folded = fold_codepoints(text);
  std::vector<TextSpan> keep_out = protected_token_spans(cps);
  auto hits_protected = [&](const TextSpan& s) {
    return std::any_of(keep_out.begin(), keep_out.end(),
                       [&](const TextSpan& p) { return p.overlaps(s); });
  };
  auto span_bytes = [&](const TextSpan& s) {
    size_t b0 = cps[s.begin].byte_offset;
    const Codepoint& last = cps[s.end() - 1];
    return std::pair<size_t, size_t>{b0, last.byte_offset + last.byte_length - b0};
  };

  // Exact and override occurrences, grouped by span so shared surnames can be
  // disambiguated once per site.
  struct Group {
    int tier = 1;
    std::vector<const EntityEntry*> entries;
    std::string surface;
  };
  std::map<std::pair<size_t, size_t>, Group> groups;
  auto scan = [&](const EntityEntry& e, const std::string& surface, int tier) {
    std::vector<uint32_t> needle = fold_codepoints(surface);
    if (needle.empty()) return;
    for (const TextSpan& hit : find_word_occurrences(folded, needle)) {
      if (hits_protected(hit)) continue;
      Group& g = groups[{hit.begin, hit.length}];
      if (g.entries.empty() || tier < g.tier) {
        if (tier < g.tier) g.entries.clear();
        g.tier = tier;
        g.surface = surface;
      }
      if (tier == g.tier) g.entries.push_back(&e);
    }
  };
  for (const auto& [span, entry] : index.overrides) scan(entry, span, 0);
  for (const EntityEntry& e : index.entries)
    for (const std::string& s : e.surface_forms) scan(e, s, 1);

  // Sentence ids and exact team mentions drive surname disambiguation.
  std::vector<int> sentence(cps.size(), 0);
  int sid = 0;
  for (size_t i = 0; i < cps.size(); ++i) {
    sentence[i] = sid;
    uint32_t v = cps[i].value;
    if (v == '.' || v == '!' || v == '?') ++sid;
  }
  struct TeamMention {
    size_t pos;
    int team;
  };
  std::vector<TeamMention> team_mentions;
  for (const auto& [key, g] : groups)
    for (const EntityEntry* e : g.entries)
      if (e->kind == EntityKind::Team && e->team >= 0)
        team_mentions.push_back({key.first, e->team});

  std::vector<Match> candidates;
  for (const auto& [key, g] : groups) {
    TextSpan span{key.first, key.second};
    std::vector<const EntityEntry*> unique;
    std::vector<std::string> seen;
    for (const EntityEntry* e : g.entries) {
      std::string id = entry_identity(*e);
      if (std::find(seen.begin(), seen.end(), id) == seen.end()) {
        seen.push_back(id);
        unique.push_back(e);
      }
    }
    Match m;
    m.span = span;
    m.tier = g.tier;
    m.surface = g.surface;
    if (unique.size() == 1) {
      m.entry = unique.front();
    } else {
      // Prefer the entry whose team is mentioned nearest in this sentence.
      long best_dist = std::numeric_limits<long>::max();
      const EntityEntry* best = nullptr;
      bool tie = false;
      for (const EntityEntry* e : unique) {
        if (e->team < 0) continue;
        for (const TeamMention& tm : team_mentions) {
          if (tm.team != e->team || tm.pos == span.begin) continue;
          if (sentence[tm.pos] != sentence[span.begin]) continue;
          long dist = std::labs(long(tm.pos) - long(span.begin));
          if (dist < best_dist) {
            best_dist = dist;
            best = e;
            tie = false;
          } else if (dist == best_dist && e != best) {
            tie = true;
          }
        }
      }
      if (best != nullptr && !tie) {
        m.entry = best;
      } else {
        m.ambiguous = true;
      }
    }
    candidates.push_back(std::move(m));
  }

  // Fuzzy tier: 1..4-word windows containing a capitalized word.
  std::vector<bool> blocked(cps.size(), false);
  for (const TextSpan& p : keep_out)
    for (size_t i = p.begin; i < p.end(); ++i) blocked[i] = true;
  std::vector<TextSpan> words;
  for (size_t i = 0; i < folded.size();) {
    if (!blocked[i] && is_word_char(folded[i])) {
      size_t j = i;
      while (j < folded.size() && !blocked[j] && is_word_char(folded[j])) ++j;
      words.push_back({i, j - i});
      i = j;
    } else {
      ++i;
    }
  }
  struct FuzzyHit {
    TextSpan span;
    double score = 0.0;
    const EntityEntry* entry = nullptr;
    std::string surface;
    std::string text;
    bool ambiguous = false;
  };
  std::vector<FuzzyHit> fuzzy_report;
  for (size_t i = 0; i < words.size(); ++i) {
    for (size_t n = 1; n <= 4 && i + n <= words.size(); ++n) {
      TextSpan span{words[i].begin, words[i + n - 1].end() - words[i].begin};
      if (hits_protected(span)) continue;
      bool capitalized = false;
      for (size_t w = i; w < i + n && !capitalized; ++w) {
        uint32_t v = cps[words[w].begin].value;
        capitalized = fold_case(v) != v;
      }
      if (!capitalized) continue;
      auto [b0, blen] = span_bytes(span);
      std::string cand(text.substr(b0, blen));
      size_t cand_len = span.length;
      double best = 0.0;
      const EntityEntry* best_e = nullptr;
      std::string best_s;
      bool tie = false;
      for (const EntityEntry& e : index.entries) {
        for (const std::string& s : e.surface_forms) {
          size_t slen = fold_codepoints(s).size();
          size_t longer = std::max(cand_len, slen);
          if (longer == 0) continue;
          double ceiling =
              1.0 - double(longer - std::min(cand_len, slen)) / double(longer);
          if (ceiling < kFuzzyReportThreshold || ceiling <= best) continue;
          double sc = fuzzy_match(cand, s);
          if (sc > best) {
            best = sc;
            best_e = &e;
            best_s = s;
            tie = false;
          } else if (sc == best && best_e != nullptr &&
                     entry_identity(e) != entry_identity(*best_e)) {
            tie = true;
          }
        }
      }
      if (best >= 1.0 || best < kFuzzyReportThreshold) continue;
      FuzzyHit hit{span, best, best_e, best_s, cand, tie};
      if (!tie && best >= kFuzzyApplyThreshold) {
        Match m;
        m.span = span;
        m.tier = 2;
        m.score = best;
        m.entry = best_e;
        m.surface = best_s;
        candidates.push_back(std::move(m));
      } else {
        fuzzy_report.push_back(std::move(hit));
      }
    }
  }

  // Longest-match, left-to-right, deterministic tie order.
  std::sort(candidates.begin(), candidates.end(),
            [](const Match& a, const Match& b) {
              if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
              if (a.span.length != b.span.length) return a.span.length > b.span.length;
              if (a.tier != b.tier) return a.tier < b.tier;
              if (a.score != b.score) return a.score > b.score;
              return a.surface < b.surface;
            });
  std::vector<Match> taken;
  size_t last_end = 0;
  for (Match& m : candidates) {
    if (!taken.empty() && m.span.begin < last_end) continue;
    last_end = m.span.end();
    taken.push_back(std::move(m));
  }

  std::string ident, anon;
  size_t cursor = 0;
  auto copy_until = [&](size_t byte) {
    std::string_view chunk = text.substr(cursor, byte - cursor);
    ident.append(chunk);
    anon.append(chunk);
    cursor = byte;
  };
  for (const Match& m : taken) {
    auto [b0, blen] = span_bytes(m.span);
    copy_until(b0);
    std::string original(text.substr(b0, blen));
    if (m.ambiguous) {
      ident.append(original);
      anon.append(original);
      result.unresolved.push_back(
          {b0, original, m.surface, m.score, false, "ambiguous"});
    } else {
      ident.append(identified_token(*m.entry));
      anon.append(generic_token(*m.entry));
      if (m.tier == 2)
        result.unresolved.push_back(
            {b0, original, m.surface, m.score, true, "fuzzy"});
    }
    cursor = b0 + blen;
  }
  copy_until(text.size());
  result.identified = std::move(ident);
  result.anonymized = std::move(anon);

  // Report-only fuzzy spans. A span is worth human review only if it holds a
  // capitalized word that no taken match already handles: applied matches
  // cover their words by replacement, ambiguous ones by the report pushed
  // above. Windows that just pad a handled word with lowercase words are
  // noise.
  auto covered_by_taken = [&](const TextSpan& s) {
    return std::any_of(taken.begin(), taken.end(), [&](const Match& m) {
      return m.span.begin <= s.begin && s.end() <= m.span.end();
    });
  };
  // One report per suspicious word: overlapping windows all flag the same
  // name, so each uncovered capitalized word elects its best-scoring
  // (then shortest, then leftmost) containing window.
  std::vector<const FuzzyHit*> elected;
  for (const TextSpan& wspan : words) {
    uint32_t v = cps[wspan.begin].value;
    if (fold_case(v) == v) continue;
    if (covered_by_taken(wspan)) continue;
    const FuzzyHit* best = nullptr;
    for (const FuzzyHit& f : fuzzy_report) {
      if (wspan.begin < f.span.begin || wspan.end() > f.span.end()) continue;
      if (best == nullptr || f.score > best->score ||
          (f.score == best->score &&
           (f.span.length < best->span.length ||
            (f.span.length == best->span.length &&
             f.span.begin < best->span.begin)))) {
        best = &f;
      }
    }
    if (best != nullptr &&
        std::find(elected.begin(), elected.end(), best) == elected.end()) {
      elected.push_back(best);
    }
  }
  for (const FuzzyHit* f : elected) {
    result.unresolved.push_back({cps[f->span.begin].byte_offset, f->text,
                                 f->surface, f->score, false,
                                 f->ambiguous ? "ambiguous" : "fuzzy"});
  }
  std::sort(result.unresolved.begin(), result.unresolved.end(),
            [](const UnresolvedSpan& a, const UnresolvedSpan& b) {
              if (a.byte_offset != b.byte_offset) return a.byte_offset < b.byte_offset;
              return a.text < b.text;
            });
  return result;
}

std::vector<std::vector<UnresolvedSpan>> anonymize_document(
    GameDocument* doc, const EntityIndex& index) {
  std::vector<std::vector<UnresolvedSpan>> unresolved;
  unresolved.reserve(doc->captions.size());
  for (CaptionRecord& rec : doc->captions) {
    AnonymizeResult r = anonymize(rec.text_original, index);
    rec.text_identified = std::move(r.identified);
    rec.text_anonymized = std::move(r.anonymized);
    unresolved.push_back(std::move(r.unresolved));
  }
  return unresolved;
}

}  // namespace sdvc
