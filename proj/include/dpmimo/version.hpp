// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.

#pragma once

namespace dpmimo {

inline constexpr const char* kVersion = "dpmimo-0.1.0";

}  // namespace dpmimo
