#ifndef SDVC_CLOCK_HPP
#define SDVC_CLOCK_HPP

#include <compare>
#include <string>
#include <string_view>

namespace sdvc {

// Half-anchored timestamp: half index (1 or 2) plus seconds from the
// half's kickoff. Textual form is "H - MM:SS".
struct GameClock {
  int half = 1;
  double seconds = 0.0;

  friend auto operator<=>(const GameClock&, const GameClock&) = default;
};

// Parses "1 - 00:31". Throws std::invalid_argument on malformed input.
GameClock parse_game_clock(std::string_view text);

// "H - MM:SS"; fractional seconds are rounded to the nearest second.
std::string format_game_clock(const GameClock& clock);

// Absolute gap in seconds, or +inf across halves (anchors in different
// halves never match).
double clock_distance(const GameClock& a, const GameClock& b);

}  // namespace sdvc

#endif
