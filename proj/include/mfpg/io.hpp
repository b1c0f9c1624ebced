#pragma once

#include "mfpg/mdp.hpp"
#include "mfpg/soft_dp.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace mfpg {

using Json = nlohmann::json;

/// Parses and validates; throws ValidationError naming the bad field.
FiniteMdp mdp_from_json(const Json& doc);
Json to_json(const FiniteMdp& mdp);

/// Reads a JSON MDP file. Missing files and parse errors raise
/// ValidationError with the path in the message.
FiniteMdp load_mdp(const std::filesystem::path& path);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Json to_json(const TabularPolicy& pi);

}  // namespace mfpg
