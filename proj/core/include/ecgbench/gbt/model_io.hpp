#pragma once

#include <filesystem>
#include <string>

#include "ecgbench/gbt/booster.hpp"

namespace ecgbench::gbt {

// JSON persistence: trees, base score, column names, and a config echo.
// Doubles use shortest round-trip formatting, so save/load/save is
// byte-stable.  load throws ParseError on malformed documents and
// DataError on I/O failure.
std::string to_json(const BoostedModel& model);
BoostedModel from_json(const std::string& text);

void save_boosted_model(const BoostedModel& model,
                        const std::filesystem::path& path);
BoostedModel load_boosted_model(const std::filesystem::path& path);

}  // namespace ecgbench::gbt
