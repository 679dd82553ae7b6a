#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ecgbench::wfdb {

// One signal line of a header: "filename format gain baseline [name]".
struct LeadSpec {
  std::string filename;
  int format = 16;  // only format 16 (little-endian int16) is supported
  double gain = 200.0;  // ADC units per millivolt
  int baseline = 0;
  std::string name;  // optional trailing lead name, e.g. "II"
};

// Parsed .hea contents. First line: "record_id num_leads rate samples";
// then one line per lead; '#'-prefixed comment lines are kept verbatim.
struct RecordHeader {
  std::string record_id;
  int num_leads = 0;
  int sampling_rate_hz = 0;
  std::size_t num_samples = 0;
  std::vector<LeadSpec> leads;
  std::vector<std::string> comments;  // full lines including the '#'
};

// Throws ParseError (with a line number) on malformed text and
// StructureError when the lead count or field ranges are inconsistent.
RecordHeader parse_header(const std::string& text);

// Inverse of parse_header; comments are emitted after the signal lines.
std::string write_header(const RecordHeader& header);

}  // namespace ecgbench::wfdb
