// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <string_view>

namespace autoplan::assets {

// Bytes of every file under assets/ and data/ compiled into the library,
// keyed by repository-relative path.
const std::map<std::string, std::string, std::less<>>& table();

// Throws std::out_of_range naming the path when the asset is not bundled.
const std::string& get(std::string_view path);

}  // namespace autoplan::assets
