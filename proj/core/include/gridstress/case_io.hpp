#pragma once

#include "gridstress/network.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace gridstress {

struct ParseOptions {
    /// MATPOWER uses rateA = 0 for "unlimited". Such branches get this rating.
    double unrated_rating_mw = 9900.0;
};

/// Parses either a MATPOWER case (baseMVA, bus, gen, branch and optional
/// bus_name sections) or the native JSON case schema; the format is detected
/// from the first non-blank character. The result is validated.
Network parse_case(std::string_view text, const ParseOptions& options = {});

Network parse_matpower(std::string_view text, const ParseOptions& options = {});
Network parse_json_case(std::string_view text);

/// Canonical native JSON: fixed key order, shortest round-trip number formatting.
std::string to_json_case(const Network& net);

/// Reads and parses a case file. Throws Error(Io) if it cannot be read.
Network load_case_file(const std::filesystem::path& path, const ParseOptions& options = {});

/// Reads a whole file into a string. Throws Error(Io).
std::string read_text_file(const std::filesystem::path& path);

}  // namespace gridstress
