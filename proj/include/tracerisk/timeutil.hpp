// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace tracerisk::timeutil {

// Floor division / modulus for int64 (C++ '/' truncates toward zero).
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
  return a - floor_div(a, b) * b;
}

// Proleptic Gregorian day count since 1970-01-01 (Howard Hinnant's
// chrono-compatible algorithms).
std::int64_t days_from_civil(int y, unsigned m, unsigned d);
void civil_from_days(std::int64_t z, int* y, unsigned* m, unsigned* d);

// ISO-8601 at second precision: "YYYY-MM-DD[T ]HH:MM:SS" with an optional
// fractional part (truncated) and an optional zone ("Z", "+HH:MM", "-HHMM");
// a missing zone means UTC. Returns false on malformed input.
bool parse_iso8601(std::string_view s, std::int64_t* out_sec);

// "YYYY-MM-DDTHH:MM:SSZ"; round-trips with parse_iso8601 at second precision.
std::string format_iso8601(std::int64_t sec);

// "YYYY-MM-DDTHH:MM" (UTC wall clock of sec).
std::string format_iso8601_minute(std::int64_t sec);

// "YYYY-MM-DD" for the civil day containing sec (UTC).
std::string format_date(std::int64_t sec);

}  // namespace tracerisk::timeutil
