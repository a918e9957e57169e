#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "pipegen/augtext.hpp"
#include "pipegen/bench.hpp"
#include "pipegen/formatopt.hpp"
#include "pipegen/wire.hpp"

namespace {

using namespace pipegen;

constexpr size_t kBlockRows = 1024;

RecordBatch typed_block() {
  bench::DatasetStream stream(bench::Payload::BenchSchema, kBlockRows, 7, 0, 1, kBlockRows);
  return *stream.next();
}

void BM_EncodeBlockRow(benchmark::State& state) {
  const RecordBatch block = typed_block();
  for (auto _ : state) benchmark::DoNotOptimize(wire::encode_block_row(block));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * kBlockRows));
}
BENCHMARK(BM_EncodeBlockRow);

void BM_EncodeBlockColumn(benchmark::State& state) {
  const RecordBatch block = typed_block();
  for (auto _ : state) benchmark::DoNotOptimize(wire::encode_block_column(wire::pivot(block)));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * kBlockRows));
}
BENCHMARK(BM_EncodeBlockColumn);

void BM_RleLowCardinality(benchmark::State& state) {
  // Four distinct values in long runs: RLE's best case.
  wire::ColumnBlock block;
  block.schema = Schema::of({{"", TypeCode::Int32}});
  block.row_count = kBlockRows * 8;
  std::vector<int32_t> column;
  for (size_t i = 0; i < block.row_count; ++i) column.push_back(static_cast<int32_t>(i / 2048));
  block.columns.emplace_back(std::move(column));
  const std::vector<uint8_t> payload = wire::encode_block_column(block);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        wire::compress(payload, wire::CompressionCode::Rle, block.schema, wire::FormatCode::Column));
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * payload.size()));
}
BENCHMARK(BM_RleLowCardinality);

void BM_DeflateBlock(benchmark::State& state) {
  const RecordBatch block = typed_block();
  const std::vector<uint8_t> payload = wire::encode_block_column(wire::pivot(block));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        wire::compress(payload, wire::CompressionCode::Deflate, block.schema, wire::FormatCode::Column));
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * payload.size()));
}
BENCHMARK(BM_DeflateBlock);

// Baseline for BM_AugTextRecord: rendering every value into a plain string,
// which is what a text protocol forces on the exporter.
void BM_PlainTextRecord(benchmark::State& state) {
  const RecordBatch block = typed_block();
  for (auto _ : state) {
    std::string line;
    for (const Row& row : block.rows) {
      line.clear();
      for (size_t i = 0; i < row.size(); ++i) {
        if (i > 0) line += ',';
        render_value(row[i], line);
      }
      line += '\n';
      benchmark::DoNotOptimize(line);
    }
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * kBlockRows));
}
BENCHMARK(BM_PlainTextRecord);

// Building the same records as part lists: no digits are ever produced.
void BM_AugTextRecord(benchmark::State& state) {
  const RecordBatch block = typed_block();
  const AugText comma = AugText::from_value(",");
  const AugText newline = AugText::from_value("\n");
  for (auto _ : state) {
    for (const Row& row : block.rows) {
      AugText record;
      for (size_t i = 0; i < row.size(); ++i) {
        if (i > 0) record.append(comma);
        record.append_value(row[i]);
      }
      record.append(newline);
      benchmark::DoNotOptimize(record.part_count());
    }
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * kBlockRows));
}
BENCHMARK(BM_AugTextRecord);

void BM_InferDelimiter(benchmark::State& state) {
  AugText record;
  const AugText pipe = AugText::from_value("|");
  for (int i = 0; i < 6; ++i) {
    if (i > 0) record.append(pipe);
    record.append_value(Value(static_cast<int64_t>(i * 1000)));
  }
  record.append(AugText::from_value("\n"));
  for (auto _ : state) benchmark::DoNotOptimize(formatopt::infer_delimiter(record));
}
BENCHMARK(BM_InferDelimiter);

void BM_SplitParse(benchmark::State& state) {
  const AugText text = AugText::from_value("12345,67890,13579,24680");
  for (auto _ : state) {
    int64_t sum = 0;
    for (const AugText& piece : text.split(',')) sum += piece.parse_int();
    benchmark::DoNotOptimize(sum);
  }
}
BENCHMARK(BM_SplitParse);

}  // namespace

BENCHMARK_MAIN();
