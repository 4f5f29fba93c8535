// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Shim: maps the conventional <nlohmann/json.hpp> include path onto the
// vendored single-header copy in vendor/.

#pragma once

#include <json.hpp>
