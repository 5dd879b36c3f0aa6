#include "tfm/series_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "text_util.hpp"

// The binary format commits to little-endian doubles; every platform this
// library targets satisfies that, and the guard keeps silent corruption out.
static_assert(std::endian::native == std::endian::little,
              "series container I/O assumes a little-endian host");

namespace tfm {
namespace {

constexpr char kMagic[4] = {'T', 'F', 'M', 'S'};
constexpr std::uint32_t kVersion = 1;

bool has_csv_extension(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& is, const std::string& what) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(v))) {
    throw IoError("series file truncated while reading " + what);
  }
  return v;
}

void write_binary(const TensorSeries& series, std::ostream& os) {
  os.write(kMagic, sizeof(kMagic));
  write_u32(os, kVersion);
  write_u32(os, static_cast<std::uint32_t>(series.order()));
  write_u32(os, static_cast<std::uint32_t>(series.length()));
  for (Index d : series.dims()) write_u32(os, static_cast<std::uint32_t>(d));
  for (Index t = 0; t < series.length(); ++t) {
    const DenseTensor& item = series[t];
    os.write(reinterpret_cast<const char*>(item.data()),
             static_cast<std::streamsize>(item.size() * sizeof(double)));
  }
}

TensorSeries read_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a tensor series file (bad magic)");
  }
  const std::uint32_t version = read_u32(is, "version");
  if (version != kVersion) {
    throw IoError("unsupported series file version " +
                  std::to_string(version));
  }
  const std::uint32_t order = read_u32(is, "order");
  const std::uint32_t length = read_u32(is, "length");
  if (order < 1 || order > static_cast<std::uint32_t>(kMaxOrder)) {
    throw IoError("series file declares an unsupported tensor order");
  }
  std::vector<Index> dims(order);
  for (std::uint32_t k = 0; k < order; ++k) {
    dims[k] = static_cast<Index>(read_u32(is, "extent"));
  }
  TensorSeries series(dims, static_cast<Index>(length));
  for (Index t = 0; t < series.length(); ++t) {
    DenseTensor& item = series[t];
    if (!is.read(reinterpret_cast<char*>(item.data()),
                 static_cast<std::streamsize>(item.size() * sizeof(double)))) {
      throw IoError("series file truncated in the data section");
    }
  }
  return series;
}

void write_csv(const TensorSeries& series, std::ostream& os) {
  os << series.length() << ',' << series.order();
  for (Index d : series.dims()) os << ',' << d;
  os << '\n';
  for (Index t = 0; t < series.length(); ++t) {
    const DenseTensor& item = series[t];
    for (Index i = 0; i < item.size(); ++i) {
      if (i > 0) os << ',';
      os << detail::format_double(item.data()[i]);
    }
    os << '\n';
  }
}

TensorSeries read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) {
    throw IoError("empty series CSV file");
  }
  const std::vector<std::string> head = detail::split(line, ',');
  if (head.size() < 3) {
    throw IoError("series CSV header needs length, order, and extents");
  }
  const Index length = detail::parse_int(head[0], "series length");
  const Index order = detail::parse_int(head[1], "tensor order");
  if (order < 1 || order > kMaxOrder ||
      static_cast<Index>(head.size()) != 2 + order) {
    throw IoError("series CSV header is inconsistent with its order field");
  }
  std::vector<Index> dims(static_cast<std::size_t>(order));
  for (Index k = 0; k < order; ++k) {
    dims[static_cast<std::size_t>(k)] =
        detail::parse_int(head[static_cast<std::size_t>(2 + k)], "extent");
  }
  TensorSeries series(dims, length);
  for (Index t = 0; t < length; ++t) {
    if (!std::getline(is, line)) {
      throw IoError("series CSV truncated at time " + std::to_string(t));
    }
    const std::vector<std::string> fields = detail::split(line, ',');
    DenseTensor& item = series[t];
    if (static_cast<Index>(fields.size()) != item.size()) {
      throw IoError("series CSV row " + std::to_string(t) +
                    " has the wrong number of entries");
    }
    for (Index i = 0; i < item.size(); ++i) {
      item.data()[i] =
          detail::parse_double(fields[static_cast<std::size_t>(i)], "entry");
    }
  }
  return series;
}

}  // namespace

void write_series(const TensorSeries& series, const std::string& path) {
  std::ofstream os(path, has_csv_extension(path)
                             ? std::ios::out
                             : std::ios::out | std::ios::binary);
  if (!os) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  if (has_csv_extension(path)) {
    write_csv(series, os);
  } else {
    write_binary(series, os);
  }
  os.flush();
  if (!os) {
    throw IoError("write to '" + path + "' failed");
  }
}

TensorSeries read_series(const std::string& path) {
  std::ifstream is(path, has_csv_extension(path)
                             ? std::ios::in
                             : std::ios::in | std::ios::binary);
  if (!is) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  return has_csv_extension(path) ? read_csv(is) : read_binary(is);
}

}  // namespace tfm
