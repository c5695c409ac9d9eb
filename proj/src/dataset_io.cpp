#include "fltp/dataset_io.hpp"

#include <cmath>
#include <set>
#include <string>

#include "fltp/error.hpp"
#include "fltp/io_util.hpp"

namespace fltp {

namespace {

void validate_for_save(const std::vector<ClientDataset>& clients) {
  if (clients.empty()) throw ValidationError("refusing to save an empty client list");
  const std::size_t k = clients.front().scenarios.size();
  std::size_t t_obs = 0, t_pre = 0;
  for (const ClientDataset& c : clients) {
    if (c.scenarios.empty()) {
      throw ValidationError("client " + std::to_string(c.client_id) + " has no scenarios");
    }
    if (c.scenarios.size() != k) {
      throw ValidationError("all clients must hold the same scenario count for this format");
    }
    std::set<std::uint64_t> ids;
    for (const Scenario& s : c.scenarios) {
      if (!ids.insert(s.scenario_id).second) {
        throw ValidationError("duplicate scenario_id " + std::to_string(s.scenario_id) +
                              " in client " + std::to_string(c.client_id));
      }
      if (s.agents.empty()) throw ValidationError("scenario with zero agents");
      if (s.agents.size() > 0xFFFF) {
        throw ValidationError("scenario " + std::to_string(s.scenario_id) +
                              " has more agents than the format's u16 field can hold");
      }
      if (s.target_index >= s.agents.size()) {
        throw ValidationError("target_index out of range in scenario " +
                              std::to_string(s.scenario_id));
      }
      for (const AgentTrack& a : s.agents) {
        if (t_obs == 0) {
          t_obs = a.observed.size();
          t_pre = a.future.size();
        }
        if (a.observed.size() != t_obs || a.future.size() != t_pre) {
          throw ValidationError("inconsistent track lengths in scenario " +
                                std::to_string(s.scenario_id));
        }
        for (const Vec2& p : a.observed) {
          if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw ValidationError("non-finite coordinate in scenario " +
                                  std::to_string(s.scenario_id));
          }
        }
        for (const Vec2& p : a.future) {
          if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw ValidationError("non-finite coordinate in scenario " +
                                  std::to_string(s.scenario_id));
          }
        }
      }
    }
  }
}

}  // namespace

void save_dataset(const std::vector<ClientDataset>& clients, const std::string& path) {
  validate_for_save(clients);

  const std::uint32_t c_count = static_cast<std::uint32_t>(clients.size());
  const std::uint32_t k_per = static_cast<std::uint32_t>(clients.front().scenarios.size());
  const std::uint32_t t_obs =
      static_cast<std::uint32_t>(clients.front().scenarios.front().agents.front().observed.size());
  const std::uint32_t t_pre =
      static_cast<std::uint32_t>(clients.front().scenarios.front().agents.front().future.size());

  std::vector<std::uint8_t> buf;
  buf.reserve(64 + static_cast<std::size_t>(c_count) * k_per *
                       (16 + 4ull * (t_obs + t_pre) * 2 * 8));
  buf.insert(buf.end(), {'F', 'T', 'P', 'D'});
  wire::put_u16(buf, kDatasetFormatVersion);
  wire::put_u32(buf, c_count);
  wire::put_u32(buf, k_per);
  wire::put_u32(buf, t_obs);
  wire::put_u32(buf, t_pre);

  for (const ClientDataset& c : clients) {
    wire::put_u32(buf, c.client_id);
    buf.push_back(static_cast<std::uint8_t>(c.regime));
    for (const Scenario& s : c.scenarios) {
      wire::put_u64(buf, s.scenario_id);
      wire::put_u16(buf, static_cast<std::uint16_t>(s.agents.size()));
      wire::put_u16(buf, s.target_index);
      for (const AgentTrack& a : s.agents) {
        for (const Vec2& p : a.observed) {
          wire::put_f64(buf, p.x);
          wire::put_f64(buf, p.y);
        }
        for (const Vec2& p : a.future) {
          wire::put_f64(buf, p.x);
          wire::put_f64(buf, p.y);
        }
      }
    }
  }

  atomic_write_file(path, buf.data(), buf.size());
}

std::vector<ClientDataset> load_dataset(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  wire::Reader r(bytes.data(), bytes.size());

  std::uint8_t magic[4];
  r.bytes(magic, 4, "magic");
  if (magic[0] != 'F' || magic[1] != 'T' || magic[2] != 'P' || magic[3] != 'D') {
    throw ParseError("bad magic, not an FTPD dataset file", 0);
  }
  const std::uint16_t version = r.u16("version");
  if (version != kDatasetFormatVersion) {
    throw ParseError("unsupported dataset version " + std::to_string(version) + " (expected " +
                         std::to_string(kDatasetFormatVersion) + ")",
                     4);
  }

  const std::uint32_t c_count = r.u32("client count");
  const std::uint32_t k_per = r.u32("scenarios per client");
  const std::uint32_t t_obs = r.u32("t_obs");
  const std::uint32_t t_pre = r.u32("t_pre");
  if (c_count == 0) throw ParseError("client count is zero", 6);
  if (k_per == 0) throw ParseError("scenarios per client is zero", 10);
  if (t_obs == 0 || t_pre == 0) throw ParseError("zero track length in header", 14);

  std::vector<ClientDataset> clients(c_count);
  for (std::uint32_t ci = 0; ci < c_count; ++ci) {
    ClientDataset& c = clients[ci];
    c.client_id = r.u32("client_id");
    std::uint8_t regime;
    r.bytes(&regime, 1, "regime");
    if (regime > 1) throw ParseError("invalid regime tag " + std::to_string(regime), r.offset() - 1);
    c.regime = static_cast<Regime>(regime);
    c.scenarios.resize(k_per);
    for (std::uint32_t k = 0; k < k_per; ++k) {
      Scenario& s = c.scenarios[k];
      s.scenario_id = r.u64("scenario_id");
      const std::uint16_t m = r.u16("agent count");
      if (m == 0) throw ParseError("scenario with zero agents", r.offset() - 2);
      s.target_index = r.u16("target_index");
      if (s.target_index >= m) throw ParseError("target_index out of range", r.offset() - 2);
      s.agents.resize(m);
      for (std::uint16_t a = 0; a < m; ++a) {
        AgentTrack& track = s.agents[a];
        track.observed.resize(t_obs);
        track.future.resize(t_pre);
        for (std::uint32_t t = 0; t < t_obs; ++t) {
          const std::size_t at = r.offset();
          track.observed[t].x = r.f64("observed x");
          track.observed[t].y = r.f64("observed y");
          if (!std::isfinite(track.observed[t].x) || !std::isfinite(track.observed[t].y)) {
            throw ParseError("non-finite coordinate", at);
          }
        }
        for (std::uint32_t t = 0; t < t_pre; ++t) {
          const std::size_t at = r.offset();
          track.future[t].x = r.f64("future x");
          track.future[t].y = r.f64("future y");
          if (!std::isfinite(track.future[t].x) || !std::isfinite(track.future[t].y)) {
            throw ParseError("non-finite coordinate", at);
          }
        }
      }
    }
  }
  if (r.remaining() != 0) {
    throw ParseError("trailing bytes after last record", r.offset());
  }
  return clients;
}

}  // namespace fltp
