#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pipegen/error.hpp"

namespace pipegen {

// Column type codes as they appear on the wire.
enum class TypeCode : uint8_t {
  Int32 = 1,
  Int64 = 2,
  Float64 = 3,
  Bool = 4,
  Text = 5,
};

const char* type_code_name(TypeCode type);
bool is_fixed_width(TypeCode type);
size_t fixed_width(TypeCode type);

// A single runtime value. Alternative order matches the TypeCode numbering.
using Value = std::variant<int32_t, int64_t, double, bool, std::string>;

TypeCode type_of(const Value& value);

// Representational equality: doubles compare bit for bit (so NaN == NaN and
// 0.0 != -0.0), everything else by value.
bool bit_equal(const Value& a, const Value& b);

// Canonical text renderings: integers in base 10, bools as true/false,
// doubles as the shortest decimal that parses back to the identical bits.
void render_value(const Value& value, std::string& out);
std::string render_value(const Value& value);
void render_int64(int64_t v, std::string& out);
void render_double(double v, std::string& out);

struct Column {
  std::string name;  // may be empty
  TypeCode type;

  bool operator==(const Column&) const = default;
};

class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Column> columns);

  static Schema of(std::initializer_list<Column> columns);

  const std::vector<Column>& columns() const { return columns_; }
  size_t column_count() const { return columns_.size(); }
  const Column& column(size_t i) const { return columns_[i]; }

  bool operator==(const Schema&) const = default;

 private:
  std::vector<Column> columns_;
};

// Throws InvalidSchema / SchemaTooWide when the invariants do not hold:
// at most 65535 columns, names valid UTF-8, non-empty names unique.
void validate_schema(const Schema& schema);

bool utf8_valid(std::string_view text);

using Row = std::vector<Value>;

struct RecordBatch {
  Schema schema;
  std::vector<Row> rows;

  size_t row_count() const { return rows.size(); }
  bool operator==(const RecordBatch& other) const;
};

// Throws TypeMismatch if any row does not conform to the schema.
void validate_batch(const RecordBatch& batch);

}  // namespace pipegen
