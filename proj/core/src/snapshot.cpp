#include "ymlab/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "ymlab/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

namespace ymlab {

namespace {
constexpr char kMagic[4] = {'Y', 'M', 'F', '1'};

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in, const char* what) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw SnapshotFormatError(std::string("read_field: truncated at ") + what);
  return v;
}
}  // namespace

void write_field(const std::filesystem::path& path, const LieField& a, double tau) {
  if (a.comps != a.grid.dim())
    throw InvalidArgumentError("write_field: only gauge potentials are stored");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SnapshotFormatError("write_field: cannot open " + path.string());
  out.write(kMagic, 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(a.grid.dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(a.n));
  for (int mu = 0; mu < a.grid.dim(); ++mu)
    put<std::uint32_t>(out, static_cast<std::uint32_t>(a.grid.extent(mu)));
  put<double>(out, a.grid.spacing());
  for (int mu = 0; mu < a.grid.dim(); ++mu) put<double>(out, a.grid.origin(mu));
  put<double>(out, tau);
  out.write(reinterpret_cast<const char*>(a.data.data()),
            static_cast<std::streamsize>(a.data.size() * sizeof(cplx)));
  if (!out) throw SnapshotFormatError("write_field: write failed for " + path.string());
}

FieldSnapshot read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotFormatError("read_field: cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw SnapshotFormatError("read_field: bad magic in " + path.string());
  const auto m = get<std::uint32_t>(in, "dim");
  const auto n = get<std::uint32_t>(in, "n");
  if (m == 0 || m > 16 || n == 0 || n > 64)
    throw SnapshotFormatError("read_field: implausible header in " + path.string());
  std::vector<int> extents(m);
  for (auto& e : extents) e = static_cast<int>(get<std::uint32_t>(in, "extent"));
  const double h = get<double>(in, "spacing");
  std::vector<double> origin(m);
  for (auto& o : origin) o = get<double>(in, "origin");
  const double tau = get<double>(in, "tau");

  FieldSnapshot snap;
  snap.tau = tau;
  snap.a = make_lie_field(Grid(extents, h, origin), static_cast<int>(n),
                          static_cast<int>(m));
  in.read(reinterpret_cast<char*>(snap.a.data.data()),
          static_cast<std::streamsize>(snap.a.data.size() * sizeof(cplx)));
  if (!in) throw SnapshotFormatError("read_field: truncated payload in " + path.string());
  in.peek();
  if (!in.eof())
    throw SnapshotFormatError("read_field: trailing bytes in " + path.string());
  return snap;
}

}  // namespace ymlab
