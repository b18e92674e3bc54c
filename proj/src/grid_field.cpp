#include "nnstokes/grid_field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>

#include "nnstokes/error.hpp"

namespace nnstokes {

static_assert(std::endian::native == std::endian::little, "field files are written little-endian");

GridField::GridField(int nx, int ny, double h, double x0, double y0, double value)
    : nx_(nx), ny_(ny), dim_(2), h_(h), x0_(x0), y0_(y0) {
  if (nx < 1 || ny < 1) throw ParameterError("GridField: shape must be positive");
  if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("GridField: spacing h must be positive");
  values_.assign(static_cast<std::size_t>(nx) * ny, value);
}

GridField GridField::line(int n, double h, double x0, double value) {
  GridField f(n, 1, h, x0, 0.0, value);
  f.dim_ = 1;
  return f;
}

bool GridField::same_shape(const GridField& other) const {
  return nx_ == other.nx_ && ny_ == other.ny_ && dim_ == other.dim_;
}

bool GridField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double GridField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double GridField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridField::max() const { return *std::max_element(values_.begin(), values_.end()); }

namespace {

constexpr char kMagic[8] = {'N', 'N', 'S', 'F', 'I', 'E', 'L', 'D'};

template <class T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ParameterError("field file truncated");
  return value;
}

}  // namespace

void write_field_binary(const std::filesystem::path& path, const GridField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot open " + path.string() + " for writing");
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.dim()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(field.ny()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(field.nx()));
  put<double>(out, field.h());
  put<double>(out, field.x0());
  put<double>(out, field.y0());
  out.write(reinterpret_cast<const char*>(field.values().data()),
            static_cast<std::streamsize>(field.size() * sizeof(double)));
  if (!out) throw ParameterError("write failed for " + path.string());
}

GridField read_field_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw ParameterError(path.string() + ": not a field file");
  if (get<std::uint32_t>(in) != 1) throw ParameterError(path.string() + ": unsupported field file version");
  const auto dim = get<std::uint32_t>(in);
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  const double h = get<double>(in);
  const double x0 = get<double>(in);
  const double y0 = get<double>(in);
  if (dim != 1 && dim != 2) throw ParameterError(path.string() + ": bad dimension");
  if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 20)) throw ParameterError(path.string() + ": bad shape");
  GridField field = dim == 1 ? GridField::line(static_cast<int>(cols), h, x0)
                             : GridField(static_cast<int>(cols), static_cast<int>(rows), h, x0, y0);
  if (dim == 1 && rows != 1) throw ParameterError(path.string() + ": 1D field with several rows");
  in.read(reinterpret_cast<char*>(field.values().data()), static_cast<std::streamsize>(field.size() * sizeof(double)));
  if (!in) throw ParameterError(path.string() + ": field file truncated");
  return field;
}

void write_field_csv(const std::filesystem::path& path, const GridField& field) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot open " + path.string() + " for writing");
  out << "i,j,x,y,value\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int j = 0; j < field.ny(); ++j) {
    for (int i = 0; i < field.nx(); ++i) {
      out << i << ',' << j << ',' << field.center_x(i) << ',' << (field.dim() == 1 ? 0.0 : field.center_y(j)) << ','
          << field(i, j) << '\n';
    }
  }
}

}  // namespace nnstokes
