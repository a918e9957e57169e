#include "pipegen/formatopt.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <limits>

#include "json.hpp"
#include "pipegen/error.hpp"

namespace pipegen::formatopt {

namespace {

bool alphanumeric(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

void put_tagged_value(std::vector<uint8_t>& out, const Value& value) {
  out.push_back(static_cast<uint8_t>(type_of(value)));
  struct Visitor {
    std::vector<uint8_t>& out;
    void operator()(int32_t v) const { wire::put_u32(out, static_cast<uint32_t>(v)); }
    void operator()(int64_t v) const { wire::put_u64(out, static_cast<uint64_t>(v)); }
    void operator()(double v) const { wire::put_u64(out, std::bit_cast<uint64_t>(v)); }
    void operator()(bool v) const { out.push_back(v ? 1 : 0); }
    void operator()(const std::string& v) const {
      wire::put_u32(out, static_cast<uint32_t>(v.size()));
      out.insert(out.end(), v.begin(), v.end());
    }
  };
  std::visit(Visitor{out}, value);
}

Value read_tagged_value(wire::ByteReader& reader) {
  const uint8_t tag = reader.u8();
  switch (static_cast<TypeCode>(tag)) {
    case TypeCode::Int32:
      return Value(static_cast<int32_t>(reader.u32()));
    case TypeCode::Int64:
      return Value(static_cast<int64_t>(reader.u64()));
    case TypeCode::Float64:
      return Value(std::bit_cast<double>(reader.u64()));
    case TypeCode::Bool: {
      const uint8_t b = reader.u8();
      if (b > 1) raise(ErrorCode::CorruptPayload, "boolean byte out of range");
      return Value(b == 1);
    }
    case TypeCode::Text: {
      const uint32_t n = reader.u32();
      return Value(std::string(reader.text(n)));
    }
  }
  raise(ErrorCode::UnknownTypeCode, "unknown value tag " + std::to_string(tag));
}

void put_key(std::vector<uint8_t>& out, std::string_view key) {
  if (key.size() > std::numeric_limits<uint16_t>::max()) {
    raise(ErrorCode::FieldTooLong, "JSON key longer than 65535 bytes");
  }
  wire::put_u16(out, static_cast<uint16_t>(key.size()));
  out.insert(out.end(), key.begin(), key.end());
}

struct TypedField {
  std::string key;
  Value value;
};

// Pulls the key/value pairs out of a flat object. Returns nothing when a
// value cannot ride in a typed row (nested containers, nulls, integers past
// the signed 64-bit range), which sends the whole document verbatim.
std::optional<std::vector<TypedField>> flatten_object(const nlohmann::ordered_json& doc) {
  std::vector<TypedField> fields;
  for (const auto& [key, value] : doc.items()) {
    if (value.is_boolean()) {
      fields.push_back({key, Value(value.get<bool>())});
    } else if (value.is_number_unsigned() &&
               value.get<uint64_t>() > static_cast<uint64_t>(std::numeric_limits<int64_t>::max())) {
      return std::nullopt;
    } else if (value.is_number_integer() || value.is_number_unsigned()) {
      const int64_t v = value.get<int64_t>();
      if (v >= std::numeric_limits<int32_t>::min() && v <= std::numeric_limits<int32_t>::max()) {
        fields.push_back({key, Value(static_cast<int32_t>(v))});
      } else {
        fields.push_back({key, Value(v)});
      }
    } else if (value.is_number_float()) {
      fields.push_back({key, Value(value.get<double>())});
    } else if (value.is_string()) {
      fields.push_back({key, Value(value.get<std::string>())});
    } else {
      return std::nullopt;
    }
  }
  return fields;
}

}  // namespace

// --- delimiter inference -----------------------------------------------------

std::optional<DelimiterReport> infer_delimiter(const AugText& record) {
  std::vector<std::pair<char, size_t>> counts;  // first-occurrence order
  record.for_each_part([&counts](const AugText::Part& part) {
    const auto* text = std::get_if<std::string_view>(&part);
    if (!text || text->size() != 1) return;
    const char c = (*text)[0];
    if (c == '\n' || c == '\r') return;  // record terminators never delimit fields
    auto it = std::find_if(counts.begin(), counts.end(), [c](const auto& e) { return e.first == c; });
    if (it == counts.end()) {
      counts.emplace_back(c, 1);
    } else {
      ++it->second;
    }
  });
  if (counts.empty()) return std::nullopt;

  size_t best = 0;
  for (const auto& [c, n] : counts) best = std::max(best, n);

  // Collect the tied leaders in first-occurrence order, then break the tie:
  // non-alphanumeric candidates beat alphanumeric ones, earlier occurrences
  // beat later ones.
  std::vector<char> leaders;
  for (const auto& [c, n] : counts) {
    if (n == best) leaders.push_back(c);
  }
  char winner = leaders.front();
  for (char c : leaders) {
    if (!alphanumeric(c) && alphanumeric(winner)) winner = c;
  }

  DelimiterReport report;
  report.delimiter = winner;
  report.candidate_counts = std::move(counts);
  report.ambiguous = leaders.size() > 1;
  return report;
}

// --- CSV interception --------------------------------------------------------

const Schema& CsvInterceptor::schema() const {
  if (!schema_) raise(ErrorCode::FormatError, "no record intercepted yet");
  return *schema_;
}

Value CsvInterceptor::intern_part(const AugText::Part& part) const {
  return std::visit([](const auto& v) -> Value {
    using T = std::decay_t<decltype(v)>;
    if constexpr (std::is_same_v<T, std::string_view>) {
      return Value(std::string(v));
    } else {
      return Value(v);
    }
  }, part);
}

void CsvInterceptor::push_record(const AugText& record) {
  Row fields;
  fields.reserve(schema_ ? schema_->column_count() : 8);
  bool expect_value = true;
  bool terminated = false;
  record.for_each_part([&](const AugText::Part& part) {
    if (terminated) raise(ErrorCode::FormatError, "record continues after its terminator");
    if (const auto* text = std::get_if<std::string_view>(&part)) {
      if (text->size() == 1 && (*text)[0] == delimiter_) {
        // A separator while a value was still expected means the field
        // between two delimiters was empty text.
        if (expect_value) fields.emplace_back(std::string());
        expect_value = true;
        return;
      }
      if (*text == "\n" || *text == "\r\n" || *text == "\r") {
        terminated = true;
        return;
      }
    }
    if (!expect_value) raise(ErrorCode::FormatError, "adjacent fields lack a delimiter");
    fields.push_back(intern_part(part));
    expect_value = false;
  });

  if (!schema_) {
    std::vector<Column> columns;
    columns.reserve(fields.size());
    for (const Value& v : fields) columns.push_back({"", type_of(v)});
    schema_ = Schema(std::move(columns));
  } else {
    if (fields.size() != schema_->column_count()) {
      raise(ErrorCode::FormatError,
            "record has " + std::to_string(fields.size()) + " fields, expected " +
                std::to_string(schema_->column_count()));
    }
    for (size_t i = 0; i < fields.size(); ++i) {
      if (type_of(fields[i]) != schema_->column(i).type) {
        raise(ErrorCode::FormatError, "field " + std::to_string(i) + " changed type mid-stream");
      }
    }
  }
  rows_.push_back(std::move(fields));
}

RecordBatch CsvInterceptor::take_batch() {
  RecordBatch batch{schema(), std::move(rows_)};
  rows_.clear();
  return batch;
}

void csv_reconstruct_row(std::string& out, const Row& row, char delimiter) {
  for (size_t i = 0; i < row.size(); ++i) {
    if (i > 0) out += delimiter;
    render_value(row[i], out);
  }
  out += '\n';
}

std::string csv_reconstruct(const RecordBatch& batch, char delimiter) {
  std::string out;
  for (const Row& row : batch.rows) csv_reconstruct_row(out, row, delimiter);
  return out;
}

// --- JSON key deduplication ----------------------------------------------------

std::vector<wire::Frame> JsonDedupEncoder::encode_line(std::string_view json_line) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::parse(json_line, nullptr, false);
  if (doc.is_discarded()) raise(ErrorCode::FormatError, "input line is not valid JSON");
  if (!doc.is_object()) raise(ErrorCode::FormatError, "top-level JSON value must be an object");

  std::vector<wire::Frame> frames;
  auto fields = flatten_object(doc);
  if (!fields) {
    frames.push_back({wire::FrameType::VerbatimRow,
                      std::vector<uint8_t>(json_line.begin(), json_line.end())});
    return frames;
  }

  const auto header_index = [this](const std::string& key) -> std::optional<size_t> {
    auto it = std::find(header_.begin(), header_.end(), key);
    if (it == header_.end()) return std::nullopt;
    return static_cast<size_t>(it - header_.begin());
  };

  if (!header_sent_) {
    header_.clear();
    std::vector<uint8_t> payload;
    wire::put_u16(payload, static_cast<uint16_t>(fields->size()));
    for (const TypedField& f : *fields) {
      header_.push_back(f.key);
      put_key(payload, f.key);
    }
    frames.push_back({wire::FrameType::KeyHeader, std::move(payload)});
    header_sent_ = true;

    std::vector<uint8_t> row;
    for (const TypedField& f : *fields) put_tagged_value(row, f.value);
    frames.push_back({wire::FrameType::Data, std::move(row)});
    return frames;
  }

  const bool exact_match = fields->size() == header_.size() &&
                           std::equal(fields->begin(), fields->end(), header_.begin(),
                                      [](const TypedField& f, const std::string& k) { return f.key == k; });
  if (exact_match) {
    std::vector<uint8_t> row;
    for (const TypedField& f : *fields) put_tagged_value(row, f.value);
    frames.push_back({wire::FrameType::Data, std::move(row)});
    return frames;
  }

  const bool overlaps = std::any_of(fields->begin(), fields->end(), [&](const TypedField& f) {
    return header_index(f.key).has_value();
  });
  if (!overlaps && !fields->empty()) {
    // Nothing in common with the key header: deduplication buys nothing for
    // this document, so it travels with its keys inline.
    frames.push_back({wire::FrameType::VerbatimRow,
                      std::vector<uint8_t>(json_line.begin(), json_line.end())});
    return frames;
  }

  for (const TypedField& f : *fields) {
    if (header_index(f.key)) continue;
    std::vector<uint8_t> payload;
    put_key(payload, f.key);
    frames.push_back({wire::FrameType::KeyExtend, std::move(payload)});
    header_.push_back(f.key);
  }

  // Presence bitmap over the (possibly just extended) header, then the
  // present values in header order.
  const size_t k = header_.size();
  std::vector<uint8_t> row((k + 7) / 8, 0);
  std::vector<const Value*> present(k, nullptr);
  for (const TypedField& f : *fields) {
    const size_t i = *header_index(f.key);
    row[i / 8] |= static_cast<uint8_t>(1u << (i % 8));
    present[i] = &f.value;
  }
  for (size_t i = 0; i < k; ++i) {
    if (present[i]) put_tagged_value(row, *present[i]);
  }
  frames.push_back({wire::FrameType::BitmapRow, std::move(row)});
  return frames;
}

std::string JsonDedupDecoder::read_row(wire::ByteReader& reader, const std::vector<size_t>& key_indices) const {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (size_t i : key_indices) {
    const Value value = read_tagged_value(reader);
    struct Visitor {
      nlohmann::ordered_json& doc;
      const std::string& key;
      void operator()(int32_t v) const { doc[key] = static_cast<int64_t>(v); }
      void operator()(int64_t v) const { doc[key] = v; }
      void operator()(double v) const { doc[key] = v; }
      void operator()(bool v) const { doc[key] = v; }
      void operator()(const std::string& v) const {
        if (!utf8_valid(v)) raise(ErrorCode::CorruptPayload, "text value is not valid UTF-8");
        doc[key] = v;
      }
    };
    std::visit(Visitor{doc, header_[i]}, value);
  }
  if (!reader.done()) raise(ErrorCode::CorruptPayload, "trailing bytes after row values");
  return doc.dump();
}

std::optional<std::string> JsonDedupDecoder::decode_frame(const wire::Frame& frame) {
  switch (frame.type) {
    case wire::FrameType::KeyHeader: {
      if (header_seen_) raise(ErrorCode::FormatError, "second key header in one stream");
      wire::ByteReader reader(frame.payload);
      const uint16_t n = reader.u16();
      header_.reserve(n);
      for (uint16_t i = 0; i < n; ++i) {
        const uint16_t len = reader.u16();
        header_.emplace_back(reader.text(len));
      }
      if (!reader.done()) raise(ErrorCode::CorruptPayload, "trailing bytes after key header");
      header_seen_ = true;
      return std::nullopt;
    }
    case wire::FrameType::KeyExtend: {
      if (!header_seen_) raise(ErrorCode::RowBeforeHeader, "key extension before key header");
      wire::ByteReader reader(frame.payload);
      const uint16_t len = reader.u16();
      std::string key(reader.text(len));
      if (!reader.done()) raise(ErrorCode::CorruptPayload, "trailing bytes after extension key");
      header_.push_back(std::move(key));
      return std::nullopt;
    }
    case wire::FrameType::Data: {
      if (!header_seen_) raise(ErrorCode::RowBeforeHeader, "value row before key header");
      wire::ByteReader reader(frame.payload);
      std::vector<size_t> indices(header_.size());
      for (size_t i = 0; i < indices.size(); ++i) indices[i] = i;
      return read_row(reader, indices);
    }
    case wire::FrameType::BitmapRow: {
      if (!header_seen_) raise(ErrorCode::RowBeforeHeader, "value row before key header");
      const size_t k = header_.size();
      const size_t bitmap_bytes = (k + 7) / 8;
      if (frame.payload.size() < bitmap_bytes) {
        raise(ErrorCode::BitmapMismatch, "presence bitmap shorter than the key header requires");
      }
      std::vector<size_t> indices;
      for (size_t i = 0; i < bitmap_bytes * 8; ++i) {
        if ((frame.payload[i / 8] >> (i % 8)) & 1u) {
          if (i >= k) raise(ErrorCode::BitmapMismatch, "presence bit set past the key header");
          indices.push_back(i);
        }
      }
      wire::ByteReader reader(frame.payload);
      reader.take(bitmap_bytes);
      return read_row(reader, indices);
    }
    case wire::FrameType::VerbatimRow: {
      return std::string(frame.payload.begin(), frame.payload.end());
    }
    case wire::FrameType::EndOfStream:
      return std::nullopt;
  }
  raise(ErrorCode::UnknownFrameType,
        "unknown frame type " + std::to_string(static_cast<int>(frame.type)));
}

}  // namespace pipegen::formatopt
