// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#include "tracerisk/timeutil.hpp"

#include <cstdio>

namespace tracerisk::timeutil {

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  std::int64_t yy = y;
  yy -= m <= 2;
  const std::int64_t era = (yy >= 0 ? yy : yy - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(yy - era * 400);            // [0, 399]
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;   // [0, 365]
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;            // [0, 146096]
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int* y, unsigned* m, unsigned* d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);          // [0, 146096]
  const unsigned yoe =
      (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;             // [0, 399]
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);          // [0, 365]
  const unsigned mp = (5 * doy + 2) / 153;                               // [0, 11]
  *d = doy - (153 * mp + 2) / 5 + 1;
  *m = mp + (mp < 10 ? 3 : -9);
  *y = static_cast<int>(yy + (*m <= 2));
}

namespace {

bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len,
                      unsigned* out) {
  if (pos + len > s.size()) return false;
  unsigned v = 0;
  for (std::size_t i = 0; i < len; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + static_cast<unsigned>(c - '0');
  }
  *out = v;
  return true;
}

constexpr unsigned kDaysInMonth[12] = {31, 28, 31, 30, 31, 30,
                                       31, 31, 30, 31, 30, 31};

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

}  // namespace

bool parse_iso8601(std::string_view s, std::int64_t* out_sec) {
  // Minimal shape: YYYY-MM-DDTHH:MM:SS (19 chars).
  unsigned yy, mo, dd, hh, mi, ss;
  if (s.size() < 19) return false;
  if (!parse_fixed_uint(s, 0, 4, &yy) || s[4] != '-' ||
      !parse_fixed_uint(s, 5, 2, &mo) || s[7] != '-' ||
      !parse_fixed_uint(s, 8, 2, &dd))
    return false;
  if (s[10] != 'T' && s[10] != ' ') return false;
  if (!parse_fixed_uint(s, 11, 2, &hh) || s[13] != ':' ||
      !parse_fixed_uint(s, 14, 2, &mi) || s[16] != ':' ||
      !parse_fixed_uint(s, 17, 2, &ss))
    return false;
  if (mo < 1 || mo > 12 || dd < 1) return false;
  unsigned dmax = kDaysInMonth[mo - 1];
  if (mo == 2 && leap(static_cast<int>(yy))) dmax = 29;
  if (dd > dmax || hh > 23 || mi > 59 || ss > 60) return false;
  if (ss == 60) ss = 59;  // fold leap seconds

  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      ++pos;
      ++digits;
    }
    if (digits == 0) return false;  // "12:00:00." is malformed
  }

  std::int64_t zone_off = 0;  // seconds east of UTC
  if (pos < s.size()) {
    const char c = s[pos];
    if (c == 'Z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      unsigned zh, zm = 0;
      if (!parse_fixed_uint(s, pos + 1, 2, &zh)) return false;
      std::size_t zpos = pos + 3;
      if (zpos < s.size() && s[zpos] == ':') ++zpos;
      if (zpos < s.size()) {
        if (!parse_fixed_uint(s, zpos, 2, &zm)) return false;
        zpos += 2;
      }
      if (zh > 23 || zm > 59) return false;
      zone_off = (c == '-' ? -1 : 1) *
                 (static_cast<std::int64_t>(zh) * 3600 + zm * 60);
      pos = zpos;
    } else {
      return false;
    }
  }
  if (pos != s.size()) return false;

  const std::int64_t days = days_from_civil(static_cast<int>(yy), mo, dd);
  *out_sec = days * 86400 + hh * 3600 + mi * 60 + ss - zone_off;
  return true;
}

std::string format_iso8601(std::int64_t sec) {
  const std::int64_t days = floor_div(sec, 86400);
  const std::int64_t sod = floor_mod(sec, 86400);
  int y;
  unsigned m, d;
  civil_from_days(days, &y, &m, &d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, m,
                d, static_cast<long long>(sod / 3600),
                static_cast<long long>((sod / 60) % 60),
                static_cast<long long>(sod % 60));
  return buf;
}

std::string format_iso8601_minute(std::int64_t sec) {
  const std::int64_t days = floor_div(sec, 86400);
  const std::int64_t sod = floor_mod(sec, 86400);
  int y;
  unsigned m, d;
  civil_from_days(days, &y, &m, &d);
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld", y, m, d,
                static_cast<long long>(sod / 3600),
                static_cast<long long>((sod / 60) % 60));
  return buf;
}

std::string format_date(std::int64_t sec) {
  const std::int64_t days = floor_div(sec, 86400);
  int y;
  unsigned m, d;
  civil_from_days(days, &y, &m, &d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
  return buf;
}

}  // namespace tracerisk::timeutil
