#include <chrono>
#include <csignal>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "pipegen/bench.hpp"
#include "pipegen/directory.hpp"
#include "pipegen/error.hpp"
#include "pipegen/net.hpp"
#include "pipegen/pipe.hpp"

namespace {

using namespace pipegen;

volatile std::sig_atomic_t g_stop = 0;

void handle_stop(int) { g_stop = 1; }

// Flags shared by export and import; --target/--source is wired up by the
// caller since the two sides name it differently.
struct TransferFlags {
  std::string target;
  uint64_t n = 100000;
  uint64_t seed = 1;
  std::string format = "column";
  std::string codec = "none";
  uint32_t workers = 1;
  std::string payload = "bench";
  uint64_t block_rows = 4096;
  std::string query;
  uint64_t debug_rows = 0;
  std::string debug_path;
  bool verify = false;
};

void add_transfer_flags(CLI::App* cmd, TransferFlags& f) {
  cmd->add_option("--n", f.n, "rows in the generated dataset");
  cmd->add_option("--seed", f.seed, "dataset seed");
  cmd->add_option("--format", f.format, "wire layout for pipe targets")
      ->check(CLI::IsMember({"text", "row", "column"}));
  cmd->add_option("--codec", f.codec, "wire compression for pipe targets")
      ->check(CLI::IsMember({"none", "rle", "deflate"}));
  cmd->add_option("--workers", f.workers, "parallel workers on this side")->check(CLI::PositiveNumber);
  cmd->add_option("--payload", f.payload, "column mix of the generated dataset")
      ->check(CLI::IsMember({"bench", "int", "float", "string"}));
  cmd->add_option("--block-rows", f.block_rows, "rows per wire block")->check(CLI::PositiveNumber);
  cmd->add_option("--query", f.query, "query id when the target carries no query=ID");
  cmd->add_option("--debug-rows", f.debug_rows, "mirror and cross-check the first N records");
  cmd->add_option("--debug-path", f.debug_path, "debug mirror file (defaults next to the target)");
}

struct ResolvedTransfer {
  bench::BenchSpec spec;
  bool to_file = false;
};

// Mode comes from the target kind: plain paths take the CSV path regardless
// of --format. A workers= parameter in the target wins over the flag but may
// not contradict an explicitly given one.
ResolvedTransfer resolve_transfer(const TransferFlags& f, const std::string& reserved_template,
                                  bool workers_flag_given) {
  ResolvedTransfer r;
  r.spec.n = f.n;
  r.spec.seed = f.seed;
  r.spec.codec = bench::parse_codec(f.codec);
  r.spec.payload = bench::parse_payload(f.payload);
  r.spec.block_rows = static_cast<size_t>(f.block_rows);
  r.spec.workers = f.workers;

  const directory::Target parsed = directory::parse_target(f.target, reserved_template);
  if (const auto* reserved = std::get_if<directory::ReservedTarget>(&parsed)) {
    if (f.format == "text") {
      r.spec.mode = bench::Mode::PipeText;
    } else if (f.format == "row") {
      r.spec.mode = bench::Mode::PipeRow;
    } else {
      r.spec.mode = bench::Mode::PipeColumn;
    }
    if (reserved->workers) {
      if (workers_flag_given && *reserved->workers != f.workers) {
        raise(ErrorCode::MalformedTarget,
              "--workers conflicts with the workers= parameter in \"" + f.target + "\"");
      }
      r.spec.workers = *reserved->workers;
    }
  } else {
    r.spec.mode = bench::Mode::FileCsv;
    r.to_file = true;
  }
  return r;
}

// Several workers cannot share one file, so file transfers with W > 1 fan
// out to numbered part files next to the requested path.
std::string worker_file(const std::string& path, uint32_t worker, uint32_t workers) {
  return workers == 1 ? path : path + ".part" + std::to_string(worker) + ".csv";
}

pipe::PipeConfig make_pipe_config(const TransferFlags& f, const ResolvedTransfer& r,
                                  const net::Endpoint& directory_endpoint,
                                  const std::string& reserved_template) {
  pipe::PipeConfig cfg;
  cfg.format = r.spec.mode == bench::Mode::PipeColumn ? wire::FormatCode::Column : wire::FormatCode::Row;
  cfg.codec = r.spec.codec;
  cfg.block_rows = r.spec.block_rows;
  cfg.directory_host = directory_endpoint.host;
  cfg.directory_port = directory_endpoint.port;
  cfg.query_id = f.query;
  cfg.worker_count = r.spec.workers;
  cfg.reserved_template = reserved_template;
  cfg.debug_rows = static_cast<size_t>(f.debug_rows);
  cfg.debug_path = f.debug_path.empty() ? f.target + ".mirror" : f.debug_path;
  return cfg;
}

int cmd_export(const TransferFlags& f, const net::Endpoint& directory_endpoint,
               const std::string& reserved_template, bool workers_flag_given) {
  const ResolvedTransfer r = resolve_transfer(f, reserved_template, workers_flag_given);
  const pipe::PipeConfig cfg = make_pipe_config(f, r, directory_endpoint, reserved_template);

  std::mutex mu;
  pipe::TransferMetrics total;
  const auto t0 = std::chrono::steady_clock::now();
  bench::run_workers(r.spec.workers, [&](uint32_t w) {
    pipe::PipeConfig worker_cfg = cfg;
    worker_cfg.worker_index = w;
    const std::string target = r.to_file ? worker_file(f.target, w, r.spec.workers) : f.target;
    auto sink = pipe::open_output(target, worker_cfg);
    const pipe::TransferMetrics m = bench::run_export_worker(r.spec, *sink, w);
    std::lock_guard lock(mu);
    total.rows += m.rows;
    total.bytes += m.bytes;
  });
  const auto wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);
  std::printf("exported %llu rows (%llu bytes) through %u worker%s in %.1f ms\n",
              static_cast<unsigned long long>(total.rows), static_cast<unsigned long long>(total.bytes),
              r.spec.workers, r.spec.workers == 1 ? "" : "s", wall.count());
  return 0;
}

int cmd_import(const TransferFlags& f, const net::Endpoint& directory_endpoint,
               const std::string& reserved_template, bool workers_flag_given) {
  const ResolvedTransfer r = resolve_transfer(f, reserved_template, workers_flag_given);
  pipe::PipeConfig cfg = make_pipe_config(f, r, directory_endpoint, reserved_template);
  if (r.to_file) cfg.file_schema = bench::payload_schema(r.spec.payload);

  std::mutex mu;
  pipe::TransferMetrics total;
  const auto t0 = std::chrono::steady_clock::now();
  bench::run_workers(r.spec.workers, [&](uint32_t w) {
    pipe::PipeConfig worker_cfg = cfg;
    worker_cfg.worker_index = w;
    const std::string target = r.to_file ? worker_file(f.target, w, r.spec.workers) : f.target;
    auto source = pipe::open_input(target, worker_cfg);
    const pipe::TransferMetrics m = bench::run_import_worker(r.spec, *source, w, f.verify);
    std::lock_guard lock(mu);
    total.rows += m.rows;
    total.bytes += m.bytes;
  });
  const auto wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);
  std::printf("imported %llu rows (%llu bytes) through %u worker%s in %.1f ms%s\n",
              static_cast<unsigned long long>(total.rows), static_cast<unsigned long long>(total.bytes),
              r.spec.workers, r.spec.workers == 1 ? "" : "s", wall.count(),
              f.verify ? ", all rows verified" : "");
  return 0;
}

int cmd_serve(uint16_t port) {
  directory::DirectoryService::Options options;
  options.port = port;
  directory::DirectoryService service(options);
  std::printf("directory listening on port %u\n", service.port());
  std::fflush(stdout);
  std::signal(SIGINT, handle_stop);
  std::signal(SIGTERM, handle_stop);
  while (g_stop == 0) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  service.stop();
  std::printf("directory stopped\n");
  return 0;
}

int cmd_bench(const std::string& spec_path, const std::string& scratch, const std::string& jsonl_path,
              bool verify) {
  std::ifstream in(spec_path);
  if (!in) raise(ErrorCode::IoError, "cannot open benchmark spec \"" + spec_path + "\"");
  std::vector<bench::BenchSpec> specs;
  std::string line;
  while (std::getline(in, line)) {
    if (auto spec = bench::parse_spec_line(line)) specs.push_back(*spec);
  }
  if (specs.empty()) raise(ErrorCode::FormatError, "no benchmarks in \"" + spec_path + "\"");

  directory::DirectoryService service;
  std::vector<bench::BenchResult> results;
  for (size_t i = 0; i < specs.size(); ++i) {
    const bench::BenchSpec& spec = specs[i];
    if (spec.mode == bench::Mode::FileCsv) {
      results.push_back(bench::run_baseline_file(spec, scratch + "/bench" + std::to_string(i), verify));
    } else {
      results.push_back(
          bench::run_pipe(spec, "127.0.0.1", service.port(), "bench" + std::to_string(i), verify));
    }
    std::fprintf(stderr, "[%zu/%zu] %s done\n", i + 1, specs.size(), bench::mode_name(spec.mode).c_str());
  }

  std::printf("%s", bench::bench_report_text(results).c_str());
  if (!jsonl_path.empty()) {
    std::ofstream out(jsonl_path, std::ios::trunc);
    if (!out) raise(ErrorCode::IoError, "cannot write report \"" + jsonl_path + "\"");
    out << bench::bench_report_jsonl(results);
  }
  return 0;
}

int cmd_proxy(const std::string& listen, const std::string& out_path, const std::string& in_path) {
  const net::Endpoint endpoint = net::parse_endpoint(listen);
  pipe::PipeConfig cfg;
  pipe::VerificationProxy proxy(endpoint.port, out_path, in_path, cfg);
  std::printf("proxy listening on port %u\n", proxy.port());
  std::fflush(stdout);
  const pipe::ProxyReport report = proxy.run();
  std::printf("proxy relayed %llu rows out (%llu bytes) and %llu rows back (%llu bytes)\n",
              static_cast<unsigned long long>(report.rows_received),
              static_cast<unsigned long long>(report.bytes_received),
              static_cast<unsigned long long>(report.rows_sent),
              static_cast<unsigned long long>(report.bytes_sent));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"data pipes between data engines: socket transfers behind file-shaped target names"};
  app.require_subcommand(1);

  std::string directory_flag = "127.0.0.1:7411";
  app.add_option("--directory", directory_flag, "directory service endpoint as HOST:PORT")
      ->envname("PIPEGEN_DIRECTORY");
  std::string reserved_template;
  app.add_option("--reserved-template", reserved_template,
                 "path pattern with a [Name] placeholder treated as a pipe target");
  app.set_config("--config", "", "file of key=value lines; any flag can be set there");

  TransferFlags export_flags;
  CLI::App* export_cmd = app.add_subcommand("export", "generate a dataset and ship it to a target");
  export_cmd->fallthrough();
  export_cmd->add_option("--target", export_flags.target, "file path or reserved pipe name to write")
      ->required();
  add_transfer_flags(export_cmd, export_flags);

  TransferFlags import_flags;
  CLI::App* import_cmd = app.add_subcommand("import", "receive a dataset from a source");
  import_cmd->fallthrough();
  import_cmd->add_option("--source", import_flags.target, "file path or reserved pipe name to read")
      ->required();
  add_transfer_flags(import_cmd, import_flags);
  import_cmd->add_flag("--verify", import_flags.verify, "check every row against the regenerated dataset");

  CLI::App* directory_cmd = app.add_subcommand("directory", "worker directory service");
  CLI::App* serve_cmd = directory_cmd->add_subcommand("serve", "run the rendezvous service");
  serve_cmd->fallthrough();
  uint16_t serve_port = 7411;
  serve_cmd->add_option("--port", serve_port, "listen port (0 picks an ephemeral one)");
  directory_cmd->require_subcommand(1);

  CLI::App* bench_cmd = app.add_subcommand("bench", "run benchmarks from a spec file");
  bench_cmd->fallthrough();
  std::string bench_spec_path;
  bench_cmd->add_option("--spec", bench_spec_path, "file with one space-separated key=value benchmark per line")
      ->required();
  std::string bench_scratch = ".";
  bench_cmd->add_option("--scratch", bench_scratch, "directory for baseline part files");
  std::string bench_jsonl;
  bench_cmd->add_option("--jsonl", bench_jsonl, "also write one JSON object per result to this file");
  bool bench_verify = false;
  bench_cmd->add_flag("--verify", bench_verify, "re-check every transferred row (slower)");

  CLI::App* proxy_cmd = app.add_subcommand("proxy", "verification proxy between a pipe and the file system");
  proxy_cmd->fallthrough();
  std::string proxy_listen;
  proxy_cmd->add_option("--listen", proxy_listen, "endpoint to accept pipe streams on, as HOST:PORT")
      ->required();
  std::string proxy_out;
  proxy_cmd->add_option("--out", proxy_out, "file that receives the incoming stream as CSV")->required();
  std::string proxy_in;
  proxy_cmd->add_option("--in", proxy_in, "file served back as the outgoing stream")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const net::Endpoint directory_endpoint = net::parse_endpoint(directory_flag);
    if (app.got_subcommand(export_cmd)) {
      return cmd_export(export_flags, directory_endpoint, reserved_template,
                        export_cmd->count("--workers") > 0);
    }
    if (app.got_subcommand(import_cmd)) {
      return cmd_import(import_flags, directory_endpoint, reserved_template,
                        import_cmd->count("--workers") > 0);
    }
    if (app.got_subcommand(directory_cmd)) return cmd_serve(serve_port);
    if (app.got_subcommand(bench_cmd)) {
      return cmd_bench(bench_spec_path, bench_scratch, bench_jsonl, bench_verify);
    }
    if (app.got_subcommand(proxy_cmd)) return cmd_proxy(proxy_listen, proxy_out, proxy_in);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
