#include "pipegen/directory.hpp"

#include <charconv>
#include <limits>

#include "pipegen/error.hpp"
#include "pipegen/wire.hpp"

namespace pipegen::directory {

namespace {

// Request op codes.
constexpr uint8_t kOpRegister = 1;
constexpr uint8_t kOpLookup = 2;
constexpr uint8_t kOpAnnounce = 3;

// Response status codes.
constexpr uint8_t kStatusOk = 0;
constexpr uint8_t kStatusDuplicate = 1;
constexpr uint8_t kStatusTimeout = 2;
constexpr uint8_t kStatusUnsupported = 3;
constexpr uint8_t kStatusMalformed = 4;

constexpr uint8_t kSideExport = 0;
constexpr uint8_t kSideImport = 1;

uint8_t read_u8(net::Socket& s) {
  uint8_t v;
  s.read_exact(&v, 1);
  return v;
}

uint16_t read_u16(net::Socket& s) {
  uint8_t b[2];
  s.read_exact(b, 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

uint32_t read_u32(net::Socket& s) {
  uint8_t b[4];
  s.read_exact(b, 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

std::string read_string16(net::Socket& s) {
  const uint16_t n = read_u16(s);
  std::string text(n, '\0');
  if (n > 0) s.read_exact(text.data(), n);
  return text;
}

void append_string16(std::vector<uint8_t>& out, std::string_view text) {
  if (text.size() > std::numeric_limits<uint16_t>::max()) {
    raise(ErrorCode::MalformedRequest, "string field longer than 65535 bytes");
  }
  wire::put_u16(out, static_cast<uint16_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
}

uint32_t parse_count(std::string_view text, const std::string& target) {
  uint32_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    raise(ErrorCode::MalformedTarget, "bad workers count in \"" + target + "\"");
  }
  if (value == 0) {
    raise(ErrorCode::MalformedTarget, "workers must be at least 1 in \"" + target + "\"");
  }
  return value;
}

}  // namespace

// --- reserved-target grammar -------------------------------------------------

Target parse_target(const std::string& text, const std::string& reserved_template) {
  std::string inner;
  bool reserved = false;
  if (text.starts_with("db://")) {
    inner = text.substr(5);
    reserved = true;
  } else if (!reserved_template.empty()) {
    const size_t placeholder = reserved_template.find("[Name]");
    if (placeholder == std::string::npos) {
      raise(ErrorCode::MalformedTarget, "reserved template must contain the [Name] placeholder");
    }
    const std::string prefix = reserved_template.substr(0, placeholder);
    const std::string suffix = reserved_template.substr(placeholder + 6);
    if (text.size() > prefix.size() + suffix.size() && text.starts_with(prefix) && text.ends_with(suffix)) {
      inner = text.substr(prefix.size(), text.size() - prefix.size() - suffix.size());
      reserved = true;
    }
  }
  if (!reserved) return FilePath{text};

  ReservedTarget target;
  const size_t question = inner.find('?');
  target.system_name = inner.substr(0, question);
  if (target.system_name.empty()) {
    raise(ErrorCode::MalformedTarget, "reserved target \"" + text + "\" has no name");
  }
  if (question == std::string::npos) return target;

  std::string params = inner.substr(question + 1);
  size_t start = 0;
  while (start <= params.size()) {
    const size_t amp = params.find('&', start);
    const std::string piece = params.substr(start, amp == std::string::npos ? std::string::npos : amp - start);
    start = amp == std::string::npos ? params.size() + 1 : amp + 1;

    const size_t eq = piece.find('=');
    if (eq == std::string::npos) {
      raise(ErrorCode::MalformedTarget, "parameter \"" + piece + "\" in \"" + text + "\" is not key=value");
    }
    const std::string key = piece.substr(0, eq);
    const std::string value = piece.substr(eq + 1);
    if (key == "workers") {
      target.workers = parse_count(value, text);
    } else if (key == "query") {
      target.query_id = value;
    } else {
      raise(ErrorCode::MalformedTarget, "unknown parameter \"" + key + "\" in \"" + text + "\"");
    }
  }
  return target;
}

std::vector<uint32_t> reconcile_plan(uint32_t exporter_count, uint32_t importer_count) {
  if (exporter_count > importer_count) {
    raise(ErrorCode::UnsupportedConfiguration,
          std::to_string(exporter_count) + " exporters cannot feed " + std::to_string(importer_count) +
              " importers; repartitioning is not supported");
  }
  std::vector<uint32_t> stubs;
  for (uint32_t i = exporter_count; i < importer_count; ++i) stubs.push_back(i);
  return stubs;
}

// --- service ------------------------------------------------------------------

DirectoryService::DirectoryService() : DirectoryService(Options{}) {}

DirectoryService::DirectoryService(Options options)
    : options_(options), listener_(net::Listener::bind_any(options.port)), port_(listener_.port()) {
  accept_thread_ = std::jthread([this] { accept_loop(); });
}

DirectoryService::~DirectoryService() { stop(); }

void DirectoryService::stop() {
  if (stop_.exchange(true)) return;
  cv_.notify_all();
  if (accept_thread_.joinable()) accept_thread_.join();
  handlers_.clear();  // joins every outstanding handler
  listener_.close();
}

size_t DirectoryService::stub_count(const std::string& query_id) const {
  std::lock_guard lock(mu_);
  const auto it = queries_.find(query_id);
  return it == queries_.end() ? 0 : it->second.stubs_sent;
}

void DirectoryService::accept_loop() {
  while (!stop_.load()) {
    std::optional<net::Socket> client;
    try {
      client = listener_.accept_for(100);
    } catch (const Error&) {
      break;  // listener torn down
    }
    sweep_handlers();
    if (!client) continue;
    auto handler = std::make_unique<Handler>();
    Handler* slot = handler.get();
    handler->thread = std::jthread([this, slot, sock = std::move(*client)]() mutable {
      handle(std::move(sock));
      slot->done.store(true);
    });
    handlers_.push_back(std::move(handler));
  }
}

void DirectoryService::sweep_handlers() {
  std::erase_if(handlers_, [](const std::unique_ptr<Handler>& h) { return h->done.load(); });
}

std::vector<DirectoryEntry> DirectoryService::take_stub_jobs(const std::string& query_id, QueryState& state) {
  std::vector<DirectoryEntry> jobs;
  if (!state.exporters || !state.importers || *state.importers <= *state.exporters) return jobs;
  for (auto& [index, reg] : state.entries) {
    if (index < *state.exporters || reg.stubbed || reg.claimed) continue;
    reg.stubbed = true;
    ++state.stubs_sent;
    jobs.push_back({query_id, index, reg.hostname, reg.port});
  }
  return jobs;
}

void DirectoryService::send_stub(const DirectoryEntry& entry) {
  try {
    net::Socket sock = net::connect_to(entry.hostname, entry.port);
    wire::TransferHeader header;
    header.format = wire::FormatCode::Row;
    header.compression = wire::CompressionCode::None;
    header.query_id = entry.query_id;
    std::vector<uint8_t> bytes = wire::encode_header(header);
    const std::vector<uint8_t> eos = wire::encode_frame({wire::FrameType::EndOfStream, {}});
    bytes.insert(bytes.end(), eos.begin(), eos.end());
    sock.write_all(bytes);
  } catch (const Error&) {
    // The orphaned importer will report its own failure; the directory
    // keeps serving.
  }
}

void DirectoryService::handle(net::Socket client) {
  std::vector<uint8_t> response;
  std::vector<DirectoryEntry> stub_jobs;
  try {
    const uint8_t op = read_u8(client);
    const std::string query_id = read_string16(client);

    switch (op) {
      case kOpRegister: {
        const uint32_t worker = read_u32(client);
        const std::string hostname = read_string16(client);
        const uint16_t port = read_u16(client);
        std::lock_guard lock(mu_);
        QueryState& state = queries_[query_id];
        if (state.entries.contains(worker)) {
          response.push_back(kStatusDuplicate);
          break;
        }
        state.entries[worker] = Registration{hostname, port, false, false};
        stub_jobs = take_stub_jobs(query_id, state);
        cv_.notify_all();
        response.push_back(kStatusOk);
        break;
      }
      case kOpAnnounce: {
        const uint8_t side = read_u8(client);
        const uint32_t count = read_u32(client);
        if (side != kSideExport && side != kSideImport) {
          response.push_back(kStatusMalformed);
          break;
        }
        std::lock_guard lock(mu_);
        QueryState& state = queries_[query_id];
        auto& slot = side == kSideExport ? state.exporters : state.importers;
        if (slot && *slot != count) {
          response.push_back(kStatusMalformed);
          break;
        }
        slot = count;
        stub_jobs = take_stub_jobs(query_id, state);
        cv_.notify_all();
        response.push_back(kStatusOk);
        break;
      }
      case kOpLookup: {
        const uint32_t worker = read_u32(client);
        std::unique_lock lock(mu_);
        const auto deadline = std::chrono::steady_clock::now() + options_.lookup_timeout;
        bool timed_out = false;
        while (true) {
          QueryState& state = queries_[query_id];
          if (state.exporters && state.importers && *state.exporters > *state.importers) {
            response.push_back(kStatusUnsupported);
            break;
          }
          const auto it = state.entries.find(worker);
          if (it != state.entries.end() && !it->second.claimed && !it->second.stubbed) {
            it->second.claimed = true;
            response.push_back(kStatusOk);
            append_string16(response, it->second.hostname);
            wire::put_u16(response, it->second.port);
            break;
          }
          if (timed_out || stop_.load()) {
            response.push_back(kStatusTimeout);
            break;
          }
          timed_out = cv_.wait_until(lock, deadline) == std::cv_status::timeout;
        }
        break;
      }
      default:
        response.push_back(kStatusMalformed);
        break;
    }
  } catch (const Error&) {
    // Short or garbled request; answer malformed if the peer still listens.
    response.assign(1, kStatusMalformed);
  }

  try {
    client.write_all(response.data(), response.size());
  } catch (const Error&) {
  }
  client.close();
  for (const DirectoryEntry& job : stub_jobs) send_stub(job);
}

// --- client -------------------------------------------------------------------

net::Socket DirectoryClient::send_request(const std::vector<uint8_t>& request) {
  net::Socket sock = net::connect_to(host_, port_);
  sock.write_all(request.data(), request.size());
  return sock;
}

namespace {

[[noreturn]] void raise_status(uint8_t status, const std::string& what) {
  switch (status) {
    case kStatusDuplicate:
      raise(ErrorCode::DuplicateRegistration, what + ": already registered");
    case kStatusTimeout:
      raise(ErrorCode::LookupTimeout, what + ": no importer arrived before the deadline");
    case kStatusUnsupported:
      raise(ErrorCode::UnsupportedConfiguration, what + ": more exporters than importers");
    case kStatusMalformed:
      raise(ErrorCode::MalformedRequest, what + ": directory rejected the request");
    default:
      raise(ErrorCode::MalformedRequest, what + ": unknown directory status " + std::to_string(status));
  }
}

}  // namespace

void DirectoryClient::announce(const std::string& query_id, bool import_side, uint32_t worker_count) {
  std::vector<uint8_t> request{kOpAnnounce};
  append_string16(request, query_id);
  request.push_back(import_side ? kSideImport : kSideExport);
  wire::put_u32(request, worker_count);
  net::Socket sock = send_request(request);
  const uint8_t status = read_u8(sock);
  if (status != kStatusOk) raise_status(status, "announce " + query_id);
}

void DirectoryClient::register_importer(const std::string& query_id, uint32_t worker_index,
                                        const std::string& hostname, uint16_t port) {
  std::vector<uint8_t> request{kOpRegister};
  append_string16(request, query_id);
  wire::put_u32(request, worker_index);
  append_string16(request, hostname);
  wire::put_u16(request, port);
  net::Socket sock = send_request(request);
  const uint8_t status = read_u8(sock);
  if (status != kStatusOk) {
    raise_status(status, "register " + query_id + "#" + std::to_string(worker_index));
  }
}

DirectoryEntry DirectoryClient::lookup(const std::string& query_id, uint32_t worker_index) {
  std::vector<uint8_t> request{kOpLookup};
  append_string16(request, query_id);
  wire::put_u32(request, worker_index);
  net::Socket sock = send_request(request);
  const uint8_t status = read_u8(sock);
  if (status != kStatusOk) {
    raise_status(status, "lookup " + query_id + "#" + std::to_string(worker_index));
  }
  DirectoryEntry entry;
  entry.query_id = query_id;
  entry.worker_index = worker_index;
  entry.hostname = read_string16(sock);
  entry.port = read_u16(sock);
  return entry;
}

}  // namespace pipegen::directory
