#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pipegen/pipe.hpp"
#include "pipegen/value.hpp"
#include "pipegen/wire.hpp"

namespace pipegen::bench {

enum class Mode { FileCsv, PipeText, PipeRow, PipeColumn };

enum class Payload { BenchSchema, Int, Float, String };

struct BenchSpec {
  uint64_t n = 0;
  uint64_t seed = 0;
  Mode mode = Mode::FileCsv;
  wire::CompressionCode codec = wire::CompressionCode::None;
  uint32_t workers = 1;
  Payload payload = Payload::BenchSchema;
  size_t block_rows = 4096;
};

struct BenchResult {
  BenchSpec spec;
  std::chrono::nanoseconds export_time{0};
  std::chrono::nanoseconds import_time{0};
  std::chrono::nanoseconds total_time{0};
  uint64_t rows = 0;
  uint64_t bytes = 0;     // wire bytes for pipes, file bytes for the baseline
  double speedup = 0.0;   // filled against a matching baseline by the report
};

// --- deterministic data ---------------------------------------------------------

// splitmix64; every row draws from its own stream seeded as
// seed ^ (index + 1) * 0x9E3779B97F4A7C15, so row i is identical no matter
// how rows are partitioned across workers.
class Rng {
 public:
  explicit Rng(uint64_t state) : state_(state) {}

  uint64_t next();
  // Uniform over [0, bound], inclusive.
  uint64_t uniform(uint64_t bound);
  // Standard normal via Box-Muller over two uniform draws.
  double normal();

 private:
  uint64_t state_;
};

Schema payload_schema(Payload payload);

// Row `index` of the dataset: the key column is the index itself; everything
// else comes from the row's own RNG stream.
Row generate_row(Payload payload, uint64_t n, uint64_t seed, uint64_t index);

// Streams one worker's partition (rows index ≡ worker mod workers) in blocks.
class DatasetStream {
 public:
  DatasetStream(Payload payload, uint64_t n, uint64_t seed, uint32_t worker, uint32_t workers,
                size_t block_rows);

  const Schema& schema() const { return schema_; }
  std::optional<RecordBatch> next();

 private:
  Payload payload_;
  uint64_t n_;
  uint64_t seed_;
  uint64_t cursor_;
  uint32_t stride_;
  size_t block_rows_;
  Schema schema_;
};

// Whole dataset in memory; meant for modest n in tests.
RecordBatch generate_dataset(Payload payload, uint64_t n, uint64_t seed);

// --- runners ---------------------------------------------------------------------

// One mock-engine worker's export: generates the partition and ships it in
// the spec's mode (typed batches through delimiter inference for pipe_row
// and pipe_column, pre-rendered lines for pipe_text, plain CSV for
// file_csv). Closes the sink and returns its metrics.
pipe::TransferMetrics run_export_worker(const BenchSpec& spec, pipe::RecordSink& sink, uint32_t worker);

// One worker's import: drains the source, parsing each line when the spec
// shipped text. With verify set every row is checked against the
// regenerated dataset.
pipe::TransferMetrics run_import_worker(const BenchSpec& spec, pipe::RecordSource& source, uint32_t worker,
                                        bool verify);

// Runs fn(0) .. fn(count-1) on one thread each and rethrows the most
// telling failure: anything specific beats a bare lookup timeout, since a
// worker whose peer already died times out without knowing why.
void run_workers(uint32_t count, const std::function<void(uint32_t)>& fn);

// Export/import through per-worker CSV files under path_prefix (phase-timed
// sequentially: the import side starts after the export side finished, as a
// file handoff does). With verify set, every imported row is checked against
// the regenerated dataset.
BenchResult run_baseline_file(const BenchSpec& spec, const std::string& path_prefix, bool verify);

// Export/import through socket pipes brokered by the directory at
// (directory_host, directory_port); the two sides run concurrently. query_id
// must be unique per call.
BenchResult run_pipe(const BenchSpec& spec, const std::string& directory_host, uint16_t directory_port,
                     const std::string& query_id, bool verify);

// --- report ------------------------------------------------------------------------

// Fills speedup fields (baseline total / result total) from matching
// FILE_CSV results and renders a fixed-width table.
std::string bench_report_text(std::vector<BenchResult>& results);

// One JSON object per line; parse_report_jsonl inverts it.
std::string bench_report_jsonl(const std::vector<BenchResult>& results);
std::vector<BenchResult> parse_report_jsonl(const std::string& text);

// --- names and spec files ------------------------------------------------------------

std::string mode_name(Mode mode);
Mode parse_mode(const std::string& name);
std::string payload_name(Payload payload);
Payload parse_payload(const std::string& name);
std::string codec_name(wire::CompressionCode codec);
wire::CompressionCode parse_codec(const std::string& name);

// One benchmark per line, space-separated key=value pairs
// (mode/codec/n/seed/workers/payload/block_rows); blank lines and #-comments
// return nothing.
std::optional<BenchSpec> parse_spec_line(const std::string& line);

}  // namespace pipegen::bench
