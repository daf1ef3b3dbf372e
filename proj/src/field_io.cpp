#include "fdd/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "fdd/error.hpp"
#include "json.hpp"

namespace fdd {
namespace {

static_assert(std::endian::native == std::endian::little,
              "field files are little-endian; add byte swapping for this target");

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  auto p = stem;
  p += ext;
  return p;
}

void write_sidecar(const std::filesystem::path& stem, const GridSpec& g, const std::string& kind,
                   const char* dtype, const char* layout) {
  nlohmann::json meta = {{"nx", g.nx()},   {"ny", g.ny()},     {"dx", g.dx()},
                         {"kind", kind},   {"dtype", dtype},   {"layout", layout},
                         {"data", with_ext(stem, ".f32").filename().string()}};
  std::ofstream out(with_ext(stem, ".json"));
  if (!out) throw std::runtime_error("cannot write " + with_ext(stem, ".json").string());
  out << meta.dump(2) << "\n";
}

void write_floats(const std::filesystem::path& path, const std::vector<float>& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
}

}  // namespace

void write_field(const std::filesystem::path& stem, const RealField& field,
                 const std::string& kind) {
  std::vector<float> data(field.values().begin(), field.values().end());
  write_floats(with_ext(stem, ".f32"), data);
  write_sidecar(stem, field.grid(), kind, "float32", "row-major");
}

void write_spectrum(const std::filesystem::path& stem, const SpectralField& spectrum,
                    const std::string& kind) {
  const GridSpec& g = spectrum.grid();
  std::vector<float> data;
  data.reserve(2 * g.size());
  for (int j = 0; j < g.ny(); ++j) {
    const int iy = g.storage_y(j - g.ny() / 2);
    for (int i = 0; i < g.nx(); ++i) {
      const Complex v = spectrum(g.storage_x(i - g.nx() / 2), iy);
      data.push_back(static_cast<float>(v.real()));
      data.push_back(static_cast<float>(v.imag()));
    }
  }
  write_floats(with_ext(stem, ".f32"), data);
  write_sidecar(stem, g, kind, "complex64", "centered");
}

RealField read_field(const std::filesystem::path& stem) {
  std::ifstream meta_in(with_ext(stem, ".json"));
  if (!meta_in) throw InvalidArgument("missing field sidecar " + with_ext(stem, ".json").string());
  const auto meta = nlohmann::json::parse(meta_in);
  if (meta.at("dtype") != "float32") throw InvalidArgument("only float32 real fields can be read");
  const GridSpec grid(meta.at("nx").get<int>(), meta.at("ny").get<int>(),
                      meta.at("dx").get<double>());
  std::ifstream in(with_ext(stem, ".f32"), std::ios::binary);
  std::vector<float> data(grid.size());
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(data.size() * sizeof(float))) {
    throw InvalidArgument("truncated field file " + with_ext(stem, ".f32").string());
  }
  return RealField(grid, std::vector<double>(data.begin(), data.end()));
}

void write_pgm(const std::filesystem::path& path, const RealField& field) {
  const GridSpec& g = field.grid();
  const double peak = field.max();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << g.nx() << " " << g.ny() << "\n65535\n";
  for (double v : field.values()) {
    const double t = peak > 0.0 ? std::clamp(v / peak, 0.0, 1.0) : 0.0;
    const auto q = static_cast<std::uint16_t>(std::lround(t * 65535.0));
    const unsigned char bytes[2] = {static_cast<unsigned char>(q >> 8),
                                    static_cast<unsigned char>(q & 0xff)};
    out.write(reinterpret_cast<const char*>(bytes), 2);
  }
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::uint64_t h = 1469598103934665603ull;
  char buf[8192];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace fdd
