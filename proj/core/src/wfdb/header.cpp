#include "ecgbench/wfdb/header.hpp"

#include <sstream>

#include "ecgbench/errors.hpp"
#include "ecgbench/util/csv.hpp"

namespace ecgbench::wfdb {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream stream(line);
  std::string token;
  while (stream >> token) fields.push_back(token);
  return fields;
}

[[noreturn]] void parse_fail(int line_no, const std::string& message) {
  throw ParseError("header line " + std::to_string(line_no) + ": " + message);
}

long long field_int(const std::string& text, int line_no,
                    const char* what) {
  try {
    return parse_int(text);
  } catch (const ParseError&) {
    parse_fail(line_no, std::string("invalid ") + what + " '" + text + "'");
  }
}

double field_double(const std::string& text, int line_no, const char* what) {
  try {
    return parse_double(text);
  } catch (const ParseError&) {
    parse_fail(line_no, std::string("invalid ") + what + " '" + text + "'");
  }
}

}  // namespace

RecordHeader parse_header(const std::string& text) {
  if (text.empty()) throw ParseError("header line 1: empty header");

  RecordHeader header;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  bool saw_record_line = false;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      header.comments.push_back(line);
      continue;
    }
    const std::vector<std::string> fields = split_fields(line);
    if (!saw_record_line) {
      if (fields.size() != 4) {
        parse_fail(line_no, "expected 'id leads rate samples', got " +
                                std::to_string(fields.size()) + " fields");
      }
      header.record_id = fields[0];
      header.num_leads =
          static_cast<int>(field_int(fields[1], line_no, "lead count"));
      header.sampling_rate_hz =
          static_cast<int>(field_int(fields[2], line_no, "sampling rate"));
      const long long samples =
          field_int(fields[3], line_no, "sample count");
      if (samples < 1) {
        throw StructureError("sample count must be positive");
      }
      header.num_samples = static_cast<std::size_t>(samples);
      saw_record_line = true;
      continue;
    }
    if (fields.size() != 4 && fields.size() != 5) {
      parse_fail(line_no,
                 "expected 'filename format gain baseline [name]', got " +
                     std::to_string(fields.size()) + " fields");
    }
    LeadSpec lead;
    lead.filename = fields[0];
    lead.format = static_cast<int>(field_int(fields[1], line_no, "format"));
    lead.gain = field_double(fields[2], line_no, "gain");
    lead.baseline =
        static_cast<int>(field_int(fields[3], line_no, "baseline"));
    if (fields.size() == 5) lead.name = fields[4];
    if (lead.format != 16) {
      parse_fail(line_no,
                 "unsupported format " + std::to_string(lead.format));
    }
    header.leads.push_back(std::move(lead));
  }
  if (!saw_record_line) throw ParseError("header line 1: no record line");

  if (header.num_leads < 1) {
    throw StructureError("lead count must be at least 1");
  }
  if (header.sampling_rate_hz < 50 || header.sampling_rate_hz > 5000) {
    throw StructureError("sampling rate " +
                         std::to_string(header.sampling_rate_hz) +
                         " outside [50, 5000]");
  }
  if (static_cast<int>(header.leads.size()) != header.num_leads) {
    throw StructureError("declared " + std::to_string(header.num_leads) +
                         " leads but found " +
                         std::to_string(header.leads.size()) +
                         " signal lines");
  }
  for (const LeadSpec& lead : header.leads) {
    if (!(lead.gain > 0.0)) {
      throw StructureError("gain must be positive in lead '" +
                           lead.filename + "'");
    }
  }
  return header;
}

std::string write_header(const RecordHeader& header) {
  std::string out = header.record_id + ' ' +
                    std::to_string(header.num_leads) + ' ' +
                    std::to_string(header.sampling_rate_hz) + ' ' +
                    std::to_string(header.num_samples) + '\n';
  for (const LeadSpec& lead : header.leads) {
    out += lead.filename + ' ' + std::to_string(lead.format) + ' ' +
           format_double(lead.gain) + ' ' + std::to_string(lead.baseline);
    if (!lead.name.empty()) out += ' ' + lead.name;
    out += '\n';
  }
  for (const std::string& comment : header.comments) {
    out += comment + '\n';
  }
  return out;
}

}  // namespace ecgbench::wfdb
