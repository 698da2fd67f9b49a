// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#pragma once

namespace tracerisk {

inline constexpr const char* kToolName = "tracerisk";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace tracerisk
