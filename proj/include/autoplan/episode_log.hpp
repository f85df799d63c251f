// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoplan/core.hpp"

namespace autoplan {

// JSON shapes used by every on-disk artifact: one self-describing object per
// record, one record per line in the *.jsonl logs.
void to_json(nlohmann::json& j, const TaskInstance& instance);
void from_json(const nlohmann::json& j, TaskInstance& instance);
void to_json(nlohmann::json& j, const Plan& plan);
void from_json(const nlohmann::json& j, Plan& plan);
void to_json(nlohmann::json& j, const Step& step);
void from_json(const nlohmann::json& j, Step& step);
void to_json(nlohmann::json& j, const UsageRecord& usage);
void from_json(const nlohmann::json& j, UsageRecord& usage);
void to_json(nlohmann::json& j, const Episode& episode);
void from_json(const nlohmann::json& j, Episode& episode);
void to_json(nlohmann::json& j, const Reflection& reflection);
void from_json(const nlohmann::json& j, Reflection& reflection);

std::string episode_to_line(const Episode& episode);
Episode episode_from_line(std::string_view line);

// Whole-file helpers. Lines are written with a trailing '\n'; blank lines are
// skipped on read.
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);
std::vector<std::string> read_lines(const std::filesystem::path& path);

void write_episode_log(const std::filesystem::path& path, const std::vector<Episode>& episodes);
std::vector<Episode> read_episode_log(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace autoplan
