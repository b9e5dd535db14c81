#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "idrm/error.hpp"
#include "idrm/idrm_map.hpp"
#include "idrm/robot_io.hpp"

namespace idrm {

namespace {

constexpr char kMagic[4] = {'I', 'D', 'R', 'M'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kEndianMarker = 0x01020304;
// magic, version, endian, header size, N, M, dims, resolution, origin, K,
// seed, digest, extent, reach payload size, occupation payload size,
// header checksum.
constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 4 + 4 + 8 + 12 + 8 + 24 + 4 + 8 + 8 + 8 + 8 + 8 + 8;
constexpr std::size_t kTrailerSize = 8;

std::uint64_t fnv1a(const std::uint8_t* p, std::size_t n) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void i32(std::int32_t v) { le(static_cast<std::uint32_t>(v), 4); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void varint(std::uint64_t v) {
    while (v >= 0x80) {
      out_.push_back(static_cast<std::uint8_t>(v | 0x80));
      v >>= 7;
    }
    out_.push_back(static_cast<std::uint8_t>(v));
  }
  void transform(const Transform& t) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) f64(t.rotation(r, c));
    for (int d = 0; d < 3; ++d) f64(t.translation[d]);
  }
  std::size_t size() const { return out_.size(); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  Reader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(le(4))); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::uint64_t varint(std::size_t end) {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      if (pos_ >= end) throw MapFileError(MapFileError::Code::kCorrupt, "list payload overruns its section");
      const std::uint8_t b = p_[pos_++];
      v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
      if (!(b & 0x80)) return v;
    }
    throw MapFileError(MapFileError::Code::kCorrupt, "malformed varint");
  }
  Transform transform() {
    Transform t;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) t.rotation(r, c) = f64();
    for (int d = 0; d < 3; ++d) t.translation[d] = f64();
    return t;
  }
  void need(std::size_t n) const {
    if (n_ - pos_ < n) throw MapFileError(MapFileError::Code::kTruncated, "map file is truncated");
  }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }

 private:
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p_[pos_++]) << (8 * i);
    return v;
  }
  const std::uint8_t* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

// Offsets (k + 1, byte positions into the payload) then the payload: each
// list as first id followed by positive gaps, all LEB128 varints.
void encodeLists(const VoxelLists& l, std::size_t k, std::vector<std::uint8_t>& offsets_out,
                 std::vector<std::uint8_t>& payload) {
  Writer off(offsets_out), pay(payload);
  for (std::size_t v = 0; v < k; ++v) {
    off.u64(pay.size());
    SampleId prev = 0;
    bool first = true;
    for (SampleId n : l.list(static_cast<VoxelId>(v))) {
      pay.varint(first ? n : n - prev);
      prev = n;
      first = false;
    }
  }
  off.u64(pay.size());
}

VoxelLists decodeLists(Reader& r, std::size_t k, std::uint64_t payload_size, std::size_t m) {
  std::vector<std::uint64_t> byte_off(k + 1);
  for (auto& o : byte_off) o = r.u64();
  if (byte_off[0] != 0 || byte_off[k] != payload_size)
    throw MapFileError(MapFileError::Code::kCorrupt, "list offsets do not match the payload size");
  const std::size_t base = r.pos();
  r.need(payload_size);
  VoxelLists l;
  l.offsets.assign(k + 1, 0);
  for (std::size_t v = 0; v < k; ++v) {
    if (byte_off[v + 1] < byte_off[v])
      throw MapFileError(MapFileError::Code::kCorrupt, "list offsets are not monotone");
    r.seek(base + byte_off[v]);
    const std::size_t end = base + byte_off[v + 1];
    std::uint64_t prev = 0;
    bool first = true;
    while (r.pos() < end) {
      const std::uint64_t d = r.varint(end);
      if (!first && d == 0) throw MapFileError(MapFileError::Code::kCorrupt, "list is not strictly increasing");
      const std::uint64_t n = first ? d : prev + d;
      if (n >= m) throw MapFileError(MapFileError::Code::kCorrupt, "list entry out of range");
      l.entries.push_back(static_cast<SampleId>(n));
      prev = n;
      first = false;
    }
    l.offsets[v + 1] = l.entries.size();
  }
  r.seek(base + payload_size);
  return l;
}

}  // namespace

std::vector<std::uint8_t> encodeMap(const IdrmMap& map, MemoryBreakdown* sizes) {
  const VoxelGrid& g = map.grid();
  const std::size_t k = g.count();
  const std::size_t m = map.size();
  const std::uint32_t dof = m == 0 ? 0 : static_cast<std::uint32_t>(map.sample(0).q.joints.size());

  std::vector<std::uint8_t> reach_off, reach_pay, occ_off, occ_pay;
  encodeLists(map.reach(), k, reach_off, reach_pay);
  encodeLists(map.occupation(), k, occ_off, occ_pay);

  std::vector<std::uint8_t> out;
  Writer w(out);
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u32(kEndianMarker);
  w.u32(static_cast<std::uint32_t>(kHeaderSize));
  w.u32(dof);
  w.u64(m);
  for (int d = 0; d < 3; ++d) w.i32(g.dims()[d]);
  w.f64(g.resolution());
  for (int d = 0; d < 3; ++d) w.f64(g.origin()[d]);
  w.u32(map.meta().orientations);
  w.u64(map.meta().seed);
  w.u64(map.meta().robot_digest);
  w.f64(map.meta().extent);
  w.u64(reach_pay.size());
  w.u64(occ_pay.size());
  w.u64(fnv1a(out.data(), out.size()));

  for (const auto& s : map.samples()) {
    w.transform(s.q.base);
    for (Eigen::Index j = 0; j < s.q.joints.size(); ++j) w.f64(s.q.joints[j]);
    w.transform(s.t_stance_eff);
    w.f64(s.g);
  }
  w.bytes(reach_off.data(), reach_off.size());
  w.bytes(reach_pay.data(), reach_pay.size());
  w.bytes(occ_off.data(), occ_off.size());
  w.bytes(occ_pay.data(), occ_pay.size());
  w.u64(fnv1a(out.data() + kHeaderSize, out.size() - kHeaderSize));

  if (sizes) {
    sizes->header = kHeaderSize + kTrailerSize;
    sizes->configurations = m * (12 + dof) * 8;
    sizes->sample_metadata = m * 13 * 8;
    sizes->reach_lists = reach_off.size() + reach_pay.size();
    sizes->occupation_lists = occ_off.size() + occ_pay.size();
  }
  return out;
}

IdrmMap decodeMap(const std::vector<std::uint8_t>& bytes, const RobotModel* model,
                  MemoryBreakdown* sizes) {
  using C = MapFileError::Code;
  if (bytes.size() < 4) throw MapFileError(C::kTruncated, "map file is truncated");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw MapFileError(C::kBadMagic, "not an iDRM map file");
  Reader r(bytes.data(), bytes.size());
  r.seek(4);
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw MapFileError(C::kVersionMismatch,
                       "map file version " + std::to_string(version) + ", expected " + std::to_string(kVersion));
  if (bytes.size() < kHeaderSize) throw MapFileError(C::kTruncated, "map file is truncated");
  const std::uint64_t stored_sum = Reader(bytes.data() + kHeaderSize - 8, 8).u64();
  if (fnv1a(bytes.data(), kHeaderSize - 8) != stored_sum)
    throw MapFileError(C::kCorrupt, "map header checksum mismatch");
  if (r.u32() != kEndianMarker) throw MapFileError(C::kCorrupt, "unsupported byte order");
  if (r.u32() != kHeaderSize) throw MapFileError(C::kCorrupt, "unexpected header size");
  const std::uint32_t dof = r.u32();
  const std::uint64_t m = r.u64();
  std::array<int, 3> dims{};
  for (auto& d : dims) d = r.i32();
  const double res = r.f64();
  Vec3 origin;
  for (int d = 0; d < 3; ++d) origin[d] = r.f64();
  MapMetadata meta;
  meta.orientations = r.u32();
  meta.seed = r.u64();
  meta.robot_digest = r.u64();
  meta.extent = r.f64();
  const std::uint64_t reach_size = r.u64();
  const std::uint64_t occ_size = r.u64();
  r.u64();

  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0 || !(res > 0.0) || m == 0 || m > 0xffffffffull)
    throw MapFileError(C::kCorrupt, "invalid map dimensions");
  const std::size_t k = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  const std::uint64_t stride = (12 + dof + 13) * 8;
  const std::uint64_t expected =
      kHeaderSize + m * stride + 2 * (k + 1) * 8 + reach_size + occ_size + kTrailerSize;
  if (bytes.size() < expected) throw MapFileError(C::kTruncated, "map file is truncated");
  if (bytes.size() > expected) throw MapFileError(C::kCorrupt, "trailing bytes after map data");
  const std::uint64_t body_sum = Reader(bytes.data() + bytes.size() - 8, 8).u64();
  if (fnv1a(bytes.data() + kHeaderSize, bytes.size() - kHeaderSize - 8) != body_sum)
    throw MapFileError(C::kCorrupt, "map body checksum mismatch");
  if (model && robotDigest(*model) != meta.robot_digest)
    throw MapFileError(C::kDigestMismatch, "map was built for a different robot description");

  std::vector<SampleRecord> samples(m);
  for (std::uint64_t n = 0; n < m; ++n) {
    SampleRecord& s = samples[n];
    s.q.base = r.transform();
    s.q.joints.resize(dof);
    for (std::uint32_t j = 0; j < dof; ++j) s.q.joints[j] = r.f64();
    s.t_stance_eff = r.transform();
    s.g = r.f64();
    s.index = static_cast<SampleId>(n);
  }
  VoxelLists reach = decodeLists(r, k, reach_size, m);
  VoxelLists occ = decodeLists(r, k, occ_size, m);
  if (sizes) {
    sizes->header = kHeaderSize + kTrailerSize;
    sizes->configurations = m * (12 + dof) * 8;
    sizes->sample_metadata = m * 13 * 8;
    sizes->reach_lists = (k + 1) * 8 + reach_size;
    sizes->occupation_lists = (k + 1) * 8 + occ_size;
  }
  return IdrmMap(VoxelGrid(origin, res, dims), std::move(samples), std::move(reach), std::move(occ), meta);
}

void saveMap(const IdrmMap& map, const std::string& path, MemoryBreakdown* sizes) {
  const auto bytes = encodeMap(map, sizes);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw MapFileError(MapFileError::Code::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw MapFileError(MapFileError::Code::kIo, "write failed: " + path);
}

IdrmMap loadMap(const std::string& path, const RobotModel* model, MemoryBreakdown* sizes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MapFileError(MapFileError::Code::kIo, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decodeMap(bytes, model, sizes);
}

}  // namespace idrm
