#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ecgbench/signal.hpp"
#include "ecgbench/wfdb/header.hpp"

namespace ecgbench::wfdb {

// A fully decoded record: millivolt samples per lead.
struct SignalRecord {
  RecordHeader header;
  std::vector<Signal> leads;
};

// Decodes a payload against its header. Binary payloads are frame-interleaved
// little-endian int16; a payload whose filename ends in ".csv" is text with
// one column per lead. Samples convert to mV as (raw - baseline) / gain.
SignalRecord read_record(const RecordHeader& header,
                         const std::vector<std::uint8_t>& payload);

// Serializes to header text plus format-16 payload bytes. Samples quantize
// to round(mV * gain) + baseline; values outside int16 raise RangeError.
std::pair<std::string, std::vector<std::uint8_t>> write_record(
    const SignalRecord& record);

// Reads <record>.hea and the payload file it references (same directory).
SignalRecord load_record(const std::filesystem::path& header_path);

// Writes <id>.hea and the payload file into `dir`; returns the header path.
std::filesystem::path store_record(const SignalRecord& record,
                                   const std::filesystem::path& dir);

// Lead used for single-lead pipelines: the lead named "II" when present,
// otherwise lead 0.
const Signal& analysis_lead(const SignalRecord& record);

}  // namespace ecgbench::wfdb
