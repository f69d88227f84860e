#include "sdvc/clock.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace sdvc {

GameClock parse_game_clock(std::string_view text) {
  int half = 0, minutes = 0, seconds = 0;
  char dash = 0;
  int consumed = 0;
  std::string s(text);
  if (std::sscanf(s.c_str(), "%d %c %d:%d%n", &half, &dash, &minutes, &seconds,
                  &consumed) != 4 ||
      dash != '-' || consumed != static_cast<int>(s.size()))
    throw std::invalid_argument("malformed game time \"" + s +
                                "\" (expected \"H - MM:SS\")");
  if (minutes < 0 || seconds < 0 || seconds > 59)
    throw std::invalid_argument("malformed game time \"" + s + "\"");
  return GameClock{half, static_cast<double>(minutes * 60 + seconds)};
}

std::string format_game_clock(const GameClock& clock) {
  long total = std::lround(clock.seconds);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%d - %02ld:%02ld", clock.half, total / 60,
                total % 60);
  return buf;
}

double clock_distance(const GameClock& a, const GameClock& b) {
  if (a.half != b.half) return std::numeric_limits<double>::infinity();
  return std::abs(a.seconds - b.seconds);
}

}  // namespace sdvc
