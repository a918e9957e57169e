#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pipegen/augtext.hpp"
#include "pipegen/value.hpp"
#include "pipegen/wire.hpp"

namespace pipegen::formatopt {

// --- delimiter inference -----------------------------------------------------

struct DelimiterReport {
  char delimiter = '\0';
  // Candidate characters with their counts, in first-occurrence order.
  std::vector<std::pair<char, size_t>> candidate_counts;
  // Set when more than one candidate shared the winning count and the
  // tie-break heuristics decided.
  bool ambiguous = false;
};

// Scans the components of an exported record and guesses the field delimiter:
// length-one text components are candidates (record terminators \n and \r are
// not), the most frequent wins, and ties prefer non-alphanumeric characters
// and then the earliest first occurrence. Returns nothing when no component
// qualifies, in which case the caller should keep shipping plain text.
std::optional<DelimiterReport> infer_delimiter(const AugText& record);

// --- CSV interception --------------------------------------------------------

// Consumes exported records whose components alternate value / delimiter and
// turns them into typed rows, dropping the delimiter and newline components
// entirely. The first record fixes the schema (types only, names empty);
// later records must match its arity and types.
class CsvInterceptor {
 public:
  explicit CsvInterceptor(char delimiter) : delimiter_(delimiter) {}

  void push_record(const AugText& record);

  bool has_schema() const { return schema_.has_value(); }
  const Schema& schema() const;
  size_t pending_rows() const { return rows_.size(); }

  // Hands over everything accumulated so far as one batch.
  RecordBatch take_batch();

 private:
  Value intern_part(const AugText::Part& part) const;

  char delimiter_;
  std::optional<Schema> schema_;
  std::vector<Row> rows_;
};

// Renders batches back to delimiter-joined, newline-terminated text using the
// canonical value renderings; the inverse of interception for text that was
// built the same way.
std::string csv_reconstruct(const RecordBatch& batch, char delimiter);
void csv_reconstruct_row(std::string& out, const Row& row, char delimiter);

// --- JSON key deduplication ----------------------------------------------------

// Streaming encoder for line-delimited flat JSON objects. The first object's
// keys go out once as a KEY_HEADER frame; matching objects send bare value
// rows; objects with extra keys extend the header (KEY_EXTEND) and are sent
// as presence-bitmap rows; objects sharing no keys with the header — or ones
// this encoding cannot express (nested values, nulls) — pass through as
// VERBATIM_ROW text.
class JsonDedupEncoder {
 public:
  // Encodes one document and returns the frames it produced, in order.
  std::vector<wire::Frame> encode_line(std::string_view json_line);

  const std::vector<std::string>& header_keys() const { return header_; }

 private:
  std::vector<std::string> header_;
  bool header_sent_ = false;
};

// Reverses JsonDedupEncoder frame by frame. decode_frame returns the decoded
// document for row frames and nothing for header bookkeeping frames; key
// order inside bitmap rows normalizes to header order.
class JsonDedupDecoder {
 public:
  std::optional<std::string> decode_frame(const wire::Frame& frame);

  const std::vector<std::string>& header_keys() const { return header_; }

 private:
  std::string read_row(wire::ByteReader& reader, const std::vector<size_t>& key_indices) const;

  std::vector<std::string> header_;
  bool header_seen_ = false;
};

}  // namespace pipegen::formatopt
