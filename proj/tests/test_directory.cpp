#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <chrono>
#include <optional>
#include <thread>
#include <vector>

#include "pipegen/directory.hpp"
#include "pipegen/net.hpp"
#include "pipegen/wire.hpp"
#include "support.hpp"

using namespace pipegen;
using namespace std::chrono_literals;
using support::error_code_of;

namespace {

directory::DirectoryService::Options quick_options(std::chrono::milliseconds timeout) {
  directory::DirectoryService::Options options;
  options.lookup_timeout = timeout;
  return options;
}

directory::ReservedTarget reserved(const directory::Target& target) {
  REQUIRE(std::holds_alternative<directory::ReservedTarget>(target));
  return std::get<directory::ReservedTarget>(target);
}

// Drains one inbound connection to EOF and returns everything it carried.
std::vector<uint8_t> drain(net::Socket sock) {
  std::vector<uint8_t> bytes;
  uint8_t buffer[512];
  while (true) {
    const size_t got = sock.read_some(buffer, sizeof(buffer));
    if (got == 0) break;
    bytes.insert(bytes.end(), buffer, buffer + got);
  }
  return bytes;
}

}  // namespace

TEST_CASE("plain paths stay plain paths") {
  const auto target = directory::parse_target("/data/out.csv");
  REQUIRE(std::holds_alternative<directory::FilePath>(target));
  CHECK(std::get<directory::FilePath>(target).path == "/data/out.csv");
  // Template-shaped names are only special once a template is configured.
  CHECK(std::holds_alternative<directory::FilePath>(directory::parse_target("/tmp/__reserved__orders")));
}

TEST_CASE("reserved targets parse name, workers, and query id") {
  SUBCASE("bare name") {
    const auto t = reserved(directory::parse_target("db://orders"));
    CHECK(t.system_name == "orders");
    CHECK(!t.workers.has_value());
    CHECK(t.worker_count() == 1);
    CHECK(t.query_id.empty());
  }
  SUBCASE("worker count") {
    const auto t = reserved(directory::parse_target("db://orders?workers=4"));
    CHECK(t.system_name == "orders");
    CHECK(t.worker_count() == 4);
  }
  SUBCASE("parameters in either order") {
    const auto a = reserved(directory::parse_target("db://orders?workers=2&query=q7"));
    CHECK(a.worker_count() == 2);
    CHECK(a.query_id == "q7");
    const auto b = reserved(directory::parse_target("db://orders?query=q7&workers=2"));
    CHECK(b.worker_count() == 2);
    CHECK(b.query_id == "q7");
  }
}

TEST_CASE("a filename template is an alternate spelling of the grammar") {
  const std::string tmpl = "/tmp/__reserved__[Name]";
  const auto t = reserved(directory::parse_target("/tmp/__reserved__orders", tmpl));
  CHECK(t.system_name == "orders");

  // With an empty suffix the parameter list rides inside the name slot.
  const auto with_workers = reserved(directory::parse_target("/tmp/__reserved__orders?workers=3", tmpl));
  CHECK(with_workers.system_name == "orders");
  CHECK(with_workers.worker_count() == 3);

  const auto suffixed = reserved(directory::parse_target("/run/pipe-orders.sock", "/run/pipe-[Name].sock"));
  CHECK(suffixed.system_name == "orders");

  // Non-matching paths and empty name slots fall back to plain files.
  CHECK(std::holds_alternative<directory::FilePath>(directory::parse_target("/tmp/other.csv", tmpl)));
  CHECK(std::holds_alternative<directory::FilePath>(directory::parse_target("/tmp/__reserved__", tmpl)));

  // db:// outranks the template.
  CHECK(reserved(directory::parse_target("db://orders", tmpl)).system_name == "orders");
}

TEST_CASE("malformed reserved targets are rejected") {
  const auto code = [](const std::string& text, const std::string& tmpl = "") {
    return error_code_of([&] { directory::parse_target(text, tmpl); });
  };
  CHECK(code("db://") == ErrorCode::MalformedTarget);
  CHECK(code("db://?workers=2") == ErrorCode::MalformedTarget);
  CHECK(code("db://x?workers=0") == ErrorCode::MalformedTarget);
  CHECK(code("db://x?workers=abc") == ErrorCode::MalformedTarget);
  CHECK(code("db://x?workers=") == ErrorCode::MalformedTarget);
  CHECK(code("db://x?workers") == ErrorCode::MalformedTarget);
  CHECK(code("db://x?shards=2") == ErrorCode::MalformedTarget);
  CHECK(code("/tmp/x", "/tmp/no-placeholder") == ErrorCode::MalformedTarget);
}

TEST_CASE("reconciliation stubs surplus importers and rejects surplus exporters") {
  CHECK(directory::reconcile_plan(4, 4).empty());
  CHECK(directory::reconcile_plan(2, 3) == std::vector<uint32_t>{2});
  CHECK(directory::reconcile_plan(1, 4) == std::vector<uint32_t>{1, 2, 3});
  CHECK(directory::reconcile_plan(0, 2) == std::vector<uint32_t>{0, 1});
  CHECK(error_code_of([] { directory::reconcile_plan(3, 2); }) == ErrorCode::UnsupportedConfiguration);
  CHECK(error_code_of([] { directory::reconcile_plan(1, 0); }) == ErrorCode::UnsupportedConfiguration);
}

TEST_CASE("registered importers resolve lookups and are claimed exactly once") {
  directory::DirectoryService service(quick_options(150ms));
  directory::DirectoryClient client("127.0.0.1", service.port());

  client.register_importer("q1", 0, "127.0.0.1", 35001);
  const directory::DirectoryEntry entry = client.lookup("q1", 0);
  CHECK(entry.hostname == "127.0.0.1");
  CHECK(entry.port == 35001);
  CHECK(entry.query_id == "q1");
  CHECK(entry.worker_index == 0);

  // The entry is spent; a second claim waits for a new importer that never
  // arrives.
  const auto start = std::chrono::steady_clock::now();
  CHECK(error_code_of([&] { client.lookup("q1", 0); }) == ErrorCode::LookupTimeout);
  CHECK(std::chrono::steady_clock::now() - start >= 100ms);
}

TEST_CASE("lookup blocks until the importer arrives") {
  directory::DirectoryService service;
  directory::DirectoryClient client("127.0.0.1", service.port());

  std::atomic<bool> looking{false};
  std::optional<directory::DirectoryEntry> entry;
  std::chrono::steady_clock::duration waited{};
  std::jthread exporter([&] {
    directory::DirectoryClient side("127.0.0.1", service.port());
    looking.store(true);
    const auto start = std::chrono::steady_clock::now();
    entry = side.lookup("q2", 3);
    waited = std::chrono::steady_clock::now() - start;
  });

  while (!looking.load()) std::this_thread::yield();
  std::this_thread::sleep_for(40ms);
  client.register_importer("q2", 3, "127.0.0.1", 35002);
  exporter.join();

  REQUIRE(entry.has_value());
  CHECK(entry->port == 35002);
  CHECK(entry->worker_index == 3);
  CHECK(waited >= 15ms);
}

TEST_CASE("duplicate registration is refused") {
  directory::DirectoryService service;
  directory::DirectoryClient client("127.0.0.1", service.port());

  client.register_importer("q3", 0, "127.0.0.1", 35003);
  CHECK(error_code_of([&] { client.register_importer("q3", 0, "127.0.0.1", 35004); }) ==
        ErrorCode::DuplicateRegistration);
  // Other worker indices are unaffected.
  client.register_importer("q3", 1, "127.0.0.1", 35005);
  CHECK(client.lookup("q3", 0).port == 35003);
  CHECK(client.lookup("q3", 1).port == 35005);
}

TEST_CASE("announced worker counts must agree with themselves") {
  directory::DirectoryService service;
  directory::DirectoryClient client("127.0.0.1", service.port());

  client.announce("q4", false, 3);
  client.announce("q4", false, 3);  // repeat of the same count is fine
  CHECK(error_code_of([&] { client.announce("q4", false, 4); }) == ErrorCode::MalformedRequest);
}

TEST_CASE("more exporters than importers fails lookups without waiting") {
  directory::DirectoryService service(quick_options(10s));
  directory::DirectoryClient client("127.0.0.1", service.port());

  client.announce("q5", false, 3);
  client.announce("q5", true, 2);
  const auto start = std::chrono::steady_clock::now();
  CHECK(error_code_of([&] { client.lookup("q5", 0); }) == ErrorCode::UnsupportedConfiguration);
  CHECK(std::chrono::steady_clock::now() - start < 5s);
}

TEST_CASE("surplus importers receive end-of-stream stubs") {
  directory::DirectoryService service(quick_options(300ms));
  directory::DirectoryClient client("127.0.0.1", service.port());

  net::Listener importer0 = net::Listener::bind_any(0);
  net::Listener importer1 = net::Listener::bind_any(0);
  net::Listener importer2 = net::Listener::bind_any(0);

  // Two importers are already registered when the counts arrive; the third
  // registers afterwards. Both orderings must produce a stub.
  client.register_importer("q6", 0, "127.0.0.1", importer0.port());
  client.register_importer("q6", 1, "127.0.0.1", importer1.port());
  client.announce("q6", true, 3);
  client.announce("q6", false, 1);
  client.register_importer("q6", 2, "127.0.0.1", importer2.port());

  for (net::Listener* listener : {&importer1, &importer2}) {
    auto stub = listener->accept_for(2000);
    REQUIRE(stub.has_value());
    const std::vector<uint8_t> bytes = drain(std::move(*stub));
    const wire::DecodedHeader decoded = wire::decode_header(bytes);
    CHECK(decoded.header.schema.column_count() == 0);
    CHECK(decoded.header.query_id == "q6");
    // One empty end-of-stream frame and nothing else.
    REQUIRE(bytes.size() == decoded.consumed + wire::kFrameEnvelopeSize);
    CHECK(bytes[decoded.consumed] == static_cast<uint8_t>(wire::FrameType::EndOfStream));
    CHECK(bytes[decoded.consumed + 1] == 0);
    CHECK(bytes[decoded.consumed + 4] == 0);
  }
  CHECK(service.stub_count("q6") == 2);

  // The lone exporter still claims worker 0; the stubbed entries are gone.
  CHECK(client.lookup("q6", 0).port == importer0.port());
  CHECK(error_code_of([&] { client.lookup("q6", 1); }) == ErrorCode::LookupTimeout);
}

TEST_CASE("queries do not interfere") {
  directory::DirectoryService service;
  directory::DirectoryClient client("127.0.0.1", service.port());

  client.register_importer("qa", 0, "127.0.0.1", 35010);
  client.register_importer("qb", 0, "127.0.0.1", 35011);
  client.announce("qa", false, 1);
  client.announce("qa", true, 1);

  CHECK(client.lookup("qa", 0).port == 35010);
  CHECK(client.lookup("qb", 0).port == 35011);
  CHECK(service.stub_count("qa") == 0);
  CHECK(service.stub_count("qb") == 0);
}

TEST_CASE("garbled requests do not wedge the service") {
  directory::DirectoryService service;

  {
    // Unknown op code with a well-formed query id.
    net::Socket sock = net::connect_to("127.0.0.1", service.port());
    const uint8_t request[] = {0xFF, 0x00, 0x00};
    sock.write_all(request, sizeof(request));
    uint8_t status = 0;
    sock.read_exact(&status, 1);
    CHECK(status == 4);
  }
  {
    // Request cut off mid-field; the peer vanishes before an answer lands.
    net::Socket sock = net::connect_to("127.0.0.1", service.port());
    const uint8_t request[] = {0x01};
    sock.write_all(request, sizeof(request));
    sock.close();
  }

  directory::DirectoryClient client("127.0.0.1", service.port());
  client.register_importer("q7", 0, "127.0.0.1", 35012);
  CHECK(client.lookup("q7", 0).port == 35012);
}

TEST_CASE("stopping the service releases blocked lookups") {
  auto service = std::make_unique<directory::DirectoryService>(quick_options(60s));
  directory::DirectoryClient client("127.0.0.1", service->port());

  std::atomic<bool> looking{false};
  std::optional<ErrorCode> code;
  std::jthread exporter([&] {
    looking.store(true);
    code = error_code_of([&] { client.lookup("q8", 0); });
  });
  while (!looking.load()) std::this_thread::yield();
  std::this_thread::sleep_for(40ms);

  service->stop();
  exporter.join();
  CHECK(code == ErrorCode::LookupTimeout);
}
