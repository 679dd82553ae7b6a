#include "ecgbench/wfdb/record.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ecgbench/errors.hpp"
#include "ecgbench/util/csv.hpp"

namespace ecgbench::wfdb {
namespace {

bool has_csv_suffix(const std::string& filename) {
  return filename.size() >= 4 &&
         filename.compare(filename.size() - 4, 4, ".csv") == 0;
}

void check_record(const SignalRecord& record) {
  if (record.leads.size() != static_cast<std::size_t>(record.header.num_leads)) {
    throw StructureError("lead count does not match header");
  }
  for (const Signal& lead : record.leads) {
    if (lead.samples.size() != record.header.num_samples) {
      throw LengthError("lead length does not match header sample count");
    }
  }
}

SignalRecord decode_csv(const RecordHeader& header,
                        const std::vector<std::uint8_t>& payload) {
  const std::string text(payload.begin(), payload.end());
  std::istringstream stream(text);

  SignalRecord record;
  record.header = header;
  record.leads.resize(header.leads.size());
  for (Signal& lead : record.leads) {
    lead.sampling_rate_hz = header.sampling_rate_hz;
    lead.samples.reserve(header.num_samples);
  }

  std::string line;
  std::size_t rows = 0;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.leads.size()) {
      throw LengthError("CSV row has " + std::to_string(cells.size()) +
                        " columns, expected " +
                        std::to_string(header.leads.size()));
    }
    if (rows >= header.num_samples) {
      throw LengthError("CSV payload has more rows than declared samples");
    }
    for (std::size_t lead = 0; lead < cells.size(); ++lead) {
      const double raw = parse_double(cells[lead]);
      record.leads[lead].samples.push_back(
          (raw - header.leads[lead].baseline) / header.leads[lead].gain);
    }
    ++rows;
  }
  if (rows != header.num_samples) {
    throw LengthError("CSV payload has " + std::to_string(rows) +
                      " rows, declared " +
                      std::to_string(header.num_samples));
  }
  return record;
}

SignalRecord decode_binary(const RecordHeader& header,
                           const std::vector<std::uint8_t>& payload) {
  const std::size_t leads = header.leads.size();
  const std::size_t expected = leads * header.num_samples * 2;
  if (payload.size() != expected) {
    throw LengthError("payload is " + std::to_string(payload.size()) +
                      " bytes, expected " + std::to_string(expected));
  }

  SignalRecord record;
  record.header = header;
  record.leads.resize(leads);
  for (Signal& lead : record.leads) {
    lead.sampling_rate_hz = header.sampling_rate_hz;
    lead.samples.resize(header.num_samples);
  }
  // Frame-interleaved: lead 0..L-1 of sample 0, then sample 1, ...
  std::size_t offset = 0;
  for (std::size_t t = 0; t < header.num_samples; ++t) {
    for (std::size_t lead = 0; lead < leads; ++lead) {
      const std::uint16_t lo = payload[offset];
      const std::uint16_t hi = payload[offset + 1];
      offset += 2;
      const auto raw = static_cast<std::int16_t>(
          static_cast<std::uint16_t>(lo | (hi << 8)));
      record.leads[lead].samples[t] =
          (raw - header.leads[lead].baseline) / header.leads[lead].gain;
    }
  }
  return record;
}

}  // namespace

SignalRecord read_record(const RecordHeader& header,
                         const std::vector<std::uint8_t>& payload) {
  if (header.leads.empty()) throw StructureError("header has no leads");
  SignalRecord record = has_csv_suffix(header.leads[0].filename)
                            ? decode_csv(header, payload)
                            : decode_binary(header, payload);
  for (const Signal& lead : record.leads) {
    for (double v : lead.samples) {
      if (!std::isfinite(v)) {
        throw DataError("non-finite sample after mV conversion");
      }
    }
  }
  return record;
}

std::pair<std::string, std::vector<std::uint8_t>> write_record(
    const SignalRecord& record) {
  check_record(record);
  const std::size_t leads = record.leads.size();

  std::vector<std::uint8_t> payload;
  payload.reserve(leads * record.header.num_samples * 2);
  for (std::size_t t = 0; t < record.header.num_samples; ++t) {
    for (std::size_t lead = 0; lead < leads; ++lead) {
      const LeadSpec& spec = record.header.leads[lead];
      const double scaled =
          std::round(record.leads[lead].samples[t] * spec.gain) +
          spec.baseline;
      if (scaled < -32768.0 || scaled > 32767.0) {
        throw RangeError("sample " + std::to_string(t) + " of lead " +
                         std::to_string(lead) +
                         " exceeds int16 after gain");
      }
      const auto raw = static_cast<std::int16_t>(scaled);
      const auto bits = static_cast<std::uint16_t>(raw);
      payload.push_back(static_cast<std::uint8_t>(bits & 0xff));
      payload.push_back(static_cast<std::uint8_t>(bits >> 8));
    }
  }

  RecordHeader header = record.header;
  for (LeadSpec& lead : header.leads) {
    if (has_csv_suffix(lead.filename)) {
      lead.filename = header.record_id + ".dat";
    }
  }
  return {write_header(header), std::move(payload)};
}

SignalRecord load_record(const std::filesystem::path& header_path) {
  std::ifstream hea(header_path);
  if (!hea) throw ParseError("cannot open header: " + header_path.string());
  std::ostringstream buffer;
  buffer << hea.rdbuf();
  const RecordHeader header = parse_header(buffer.str());

  for (const LeadSpec& lead : header.leads) {
    if (lead.filename != header.leads[0].filename) {
      throw StructureError("all leads must share one payload file");
    }
  }
  const std::filesystem::path payload_path =
      header_path.parent_path() / header.leads[0].filename;
  std::ifstream data(payload_path, std::ios::binary);
  if (!data) {
    throw ParseError("cannot open payload: " + payload_path.string());
  }
  std::vector<std::uint8_t> payload(
      (std::istreambuf_iterator<char>(data)),
      std::istreambuf_iterator<char>());
  return read_record(header, payload);
}

std::filesystem::path store_record(const SignalRecord& record,
                                   const std::filesystem::path& dir) {
  auto [header_text, payload] = write_record(record);
  const RecordHeader reparsed = parse_header(header_text);

  std::filesystem::create_directories(dir);
  const std::filesystem::path header_path =
      dir / (record.header.record_id + ".hea");
  {
    std::ofstream out(header_path, std::ios::binary);
    out.write(header_text.data(),
              static_cast<std::streamsize>(header_text.size()));
  }
  const std::filesystem::path payload_path =
      dir / reparsed.leads[0].filename;
  {
    std::ofstream out(payload_path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
  }
  return header_path;
}

const Signal& analysis_lead(const SignalRecord& record) {
  for (std::size_t i = 0; i < record.leads.size(); ++i) {
    if (record.header.leads[i].name == "II") return record.leads[i];
  }
  return record.leads.at(0);
}

}  // namespace ecgbench::wfdb
