// SPDX-License-Identifier: Apache-2.0
#include "autoplan/assets.hpp"

#include <stdexcept>

namespace autoplan::assets {

const std::string& get(std::string_view path) {
    const auto& entries = table();
    auto it = entries.find(path);
    if (it == entries.end()) {
        throw std::out_of_range("asset not bundled: " + std::string(path));
    }
    return it->second;
}

}  // namespace autoplan::assets
