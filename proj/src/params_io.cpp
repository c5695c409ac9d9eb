#include "fltp/params_io.hpp"

#include <string>
#include <vector>

#include "fltp/error.hpp"
#include "fltp/io_util.hpp"

namespace fltp {

void save_params(const ParamVector& params, const std::string& path) {
  params.dims.validate();
  if (params.values.size() != params.dims.param_count()) {
    throw ValidationError("parameter vector length does not match dims");
  }
  std::vector<std::uint8_t> buf;
  buf.reserve(32 + params.values.size() * 8);
  buf.insert(buf.end(), {'F', 'T', 'P', 'W'});
  wire::put_u16(buf, kParamsFormatVersion);
  wire::put_u32(buf, params.dims.t_obs);
  wire::put_u32(buf, params.dims.t_pre);
  wire::put_u32(buf, params.dims.modes);
  wire::put_u32(buf, params.dims.hidden);
  wire::put_u64(buf, params.values.size());
  for (double v : params.values) wire::put_f64(buf, v);
  atomic_write_file(path, buf.data(), buf.size());
}

ParamVector load_params(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  wire::Reader r(bytes.data(), bytes.size());

  std::uint8_t magic[4];
  r.bytes(magic, 4, "magic");
  if (magic[0] != 'F' || magic[1] != 'T' || magic[2] != 'P' || magic[3] != 'W') {
    throw ParseError("bad magic, not an FTPW weight file", 0);
  }
  const std::uint16_t version = r.u16("version");
  if (version != kParamsFormatVersion) {
    throw ParseError("unsupported weight file version " + std::to_string(version) +
                         " (expected " + std::to_string(kParamsFormatVersion) + ")",
                     4);
  }

  ParamVector params;
  params.dims.t_obs = r.u32("t_obs");
  params.dims.t_pre = r.u32("t_pre");
  params.dims.modes = r.u32("modes");
  params.dims.hidden = r.u32("hidden");
  params.dims.validate();
  const std::uint64_t count = r.u64("parameter count");
  if (count != params.dims.param_count()) {
    throw ParseError("parameter count " + std::to_string(count) + " does not match dims header",
                     r.offset() - 8);
  }
  params.values.resize(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    params.values[k] = r.f64("parameter value");
  }
  if (r.remaining() != 0) throw ParseError("trailing bytes after payload", r.offset());
  return params;
}

}  // namespace fltp
