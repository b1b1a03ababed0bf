#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cfstp/exact.hpp"
#include "cfstp/model.hpp"

namespace cfstp {

// JSON documents with sorted keys, so equal objects serialize identically.
std::string instance_to_json(const Instance& inst);
Instance instance_from_json(std::string_view text);
std::string solution_to_json(const Solution& solution);
Solution solution_from_json(std::string_view text);

Instance load_instance(const std::filesystem::path& path);
void save_instance(const std::filesystem::path& path, const Instance& inst);
Solution load_solution(const std::filesystem::path& path);
void save_solution(const std::filesystem::path& path, const Solution& solution);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace cfstp
