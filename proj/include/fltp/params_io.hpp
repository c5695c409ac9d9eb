#pragma once

#include <string>

#include "fltp/model.hpp"

namespace fltp {

// FTPW weight file: "FTPW" magic, u16 version, dims header
// (T_obs, T_pre, F, H as u32, parameter count as u64), then the raw
// little-endian float64 payload.
inline constexpr std::uint16_t kParamsFormatVersion = 1;

void save_params(const ParamVector& params, const std::string& path);
ParamVector load_params(const std::string& path);

}  // namespace fltp
