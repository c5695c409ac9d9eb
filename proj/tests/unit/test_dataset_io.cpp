#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "fltp/dataset_io.hpp"
#include "fltp/error.hpp"
#include "fltp/io_util.hpp"
#include "fltp/scenario.hpp"

using namespace fltp;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::vector<ClientDataset> sample_clients() {
  GeneratorConfig cfg;
  cfg.seed = 11;
  cfg.num_clients = 4;
  cfg.scenarios_per_client = 2;
  cfg.agents_min = 1;
  cfg.agents_max = 3;
  cfg.t_obs = 5;
  cfg.t_pre = 4;
  return partition_clients(cfg);
}

}  // namespace

TEST_CASE("save/load round trip is the identity") {
  const auto clients = sample_clients();
  const std::string path = temp_path("fltp_roundtrip.ftpd");
  save_dataset(clients, path);
  const auto loaded = load_dataset(path);
  CHECK(loaded == clients);
  std::filesystem::remove(path);
}

TEST_CASE("empty client list is rejected") {
  CHECK_THROWS_AS(save_dataset({}, temp_path("fltp_empty.ftpd")), ValidationError);
}

TEST_CASE("truncated file yields a parse error with a byte offset") {
  const auto clients = sample_clients();
  const std::string path = temp_path("fltp_trunc.ftpd");
  save_dataset(clients, path);

  auto bytes = read_file_bytes(path);
  bytes.resize(bytes.size() / 2);  // cut mid-record
  atomic_write_file(path, bytes.data(), bytes.size());

  bool threw = false;
  try {
    (void)load_dataset(path);
  } catch (const ParseError& e) {
    threw = true;
    CHECK(e.byte_offset() <= bytes.size());
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
  CHECK(threw);
  std::filesystem::remove(path);
}

TEST_CASE("version mismatch is an explicit error") {
  const auto clients = sample_clients();
  const std::string path = temp_path("fltp_version.ftpd");
  save_dataset(clients, path);

  auto bytes = read_file_bytes(path);
  bytes[4] = 0x7f;  // version lives right after the magic
  atomic_write_file(path, bytes.data(), bytes.size());

  bool threw = false;
  try {
    (void)load_dataset(path);
  } catch (const ParseError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }
  CHECK(threw);
  std::filesystem::remove(path);
}

TEST_CASE("bad magic is rejected") {
  const std::string path = temp_path("fltp_magic.ftpd");
  const std::string junk = "not a dataset at all";
  atomic_write_file(path, junk);
  CHECK_THROWS_AS((void)load_dataset(path), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("trailing garbage is rejected") {
  const auto clients = sample_clients();
  const std::string path = temp_path("fltp_trailing.ftpd");
  save_dataset(clients, path);
  auto bytes = read_file_bytes(path);
  bytes.push_back(0x00);
  atomic_write_file(path, bytes.data(), bytes.size());
  CHECK_THROWS_AS((void)load_dataset(path), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("agent counts beyond the u16 field are rejected") {
  auto clients = sample_clients();
  Scenario& s = clients[0].scenarios[0];
  const AgentTrack proto = s.agents[0];
  s.agents.assign(0x10000, proto);
  CHECK_THROWS_AS(save_dataset(clients, temp_path("fltp_overflow.ftpd")), ValidationError);
}

TEST_CASE("save writes the documented header layout") {
  const auto clients = sample_clients();
  const std::string path = temp_path("fltp_header.ftpd");
  save_dataset(clients, path);
  const auto bytes = read_file_bytes(path);
  REQUIRE(bytes.size() > 22);
  CHECK(bytes[0] == 'F');
  CHECK(bytes[1] == 'T');
  CHECK(bytes[2] == 'P');
  CHECK(bytes[3] == 'D');
  CHECK(bytes[4] == 1);  // version, little-endian u16
  CHECK(bytes[5] == 0);
  CHECK(bytes[6] == 4);  // C = 4
  CHECK(bytes[10] == 2);  // K_c = 2
  CHECK(bytes[14] == 5);  // T_obs = 5
  CHECK(bytes[18] == 4);  // T_pre = 4
  std::filesystem::remove(path);
}
