#pragma once

#include <string>
#include <vector>

#include "fltp/scenario.hpp"

namespace fltp {

// FTPD dataset file, all integers and floats little-endian:
//
//   "FTPD"                           magic
//   u16  version (= 1)
//   u32  C        number of clients
//   u32  K_c      scenarios per client (uniform across clients)
//   u32  T_obs
//   u32  T_pre
//   C client records:
//     u32  client_id
//     u8   regime (0 = A, 1 = B)
//     K_c scenario records:
//       u64  scenario_id
//       u16  m          agent count
//       u16  target_index
//       m agent tracks: T_obs (x,y) f64 pairs observed, then T_pre future
//
// load(save(x)) == x; doubles round-trip exactly through the raw bit pattern.

inline constexpr std::uint16_t kDatasetFormatVersion = 1;

void save_dataset(const std::vector<ClientDataset>& clients, const std::string& path);

// Throws ParseError (with byte offset) on malformed content; never returns a
// partially parsed dataset.
std::vector<ClientDataset> load_dataset(const std::string& path);

}  // namespace fltp
