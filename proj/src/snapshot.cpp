#include "eulab/snapshot.hpp"

#include <bit>
#include <fstream>
#include <sstream>

namespace eulab {

namespace {

constexpr char kMagic[4] = {'E', 'U', 'L', 'B'};

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw ValidationError("snapshot: truncated header");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += sizeof(T);
  return v;
}

std::int64_t element_count(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (auto d : shape) {
    if (d < 0) throw ValidationError("snapshot: negative dimension");
    n *= d;
  }
  return n;
}

}  // namespace

const SnapshotField& Snapshot::field(const std::string& name) const {
  for (const auto& f : fields)
    if (f.name == name) return f;
  throw ValidationError("snapshot: no field '" + name + "'");
}

std::string encode_snapshot(const Snapshot& s) {
  nlohmann::json meta = s.metadata;
  meta["format_version"] = kSnapshotVersion;
  meta["dtype"] = "float64";
  meta["endianness"] = "little";
  meta["fields"] = nlohmann::json::array();
  for (const auto& f : s.fields) {
    if (element_count(f.shape) != static_cast<std::int64_t>(f.data.size()))
      throw ValidationError("snapshot: field '" + f.name + "' size does not match its shape");
    meta["fields"].push_back({{"name", f.name}, {"shape", f.shape}});
  }
  const std::string text = meta.dump();
  std::string out(kMagic, 4);
  put_le<std::uint32_t>(out, kSnapshotVersion);
  put_le<std::uint64_t>(out, text.size());
  out += text;
  for (const auto& f : s.fields)
    for (double v : f.data) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Snapshot decode_snapshot(const std::string& bytes) {
  if (bytes.size() < 16 || bytes.compare(0, 4, std::string(kMagic, 4)) != 0)
    throw ValidationError("snapshot: bad magic (expected EULB)");
  std::size_t pos = 4;
  const auto version = get_le<std::uint32_t>(bytes, pos);
  if (version != kSnapshotVersion)
    throw ValidationError("snapshot: unsupported format version " + std::to_string(version));
  const auto len = get_le<std::uint64_t>(bytes, pos);
  if (len > bytes.size() - pos) throw ValidationError("snapshot: metadata length exceeds file size");
  Snapshot s;
  try {
    s.metadata = nlohmann::json::parse(bytes.substr(pos, len));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("snapshot: metadata is not valid JSON: ") + e.what());
  }
  pos += len;
  if (!s.metadata.is_object() || !s.metadata.contains("fields") || !s.metadata["fields"].is_array())
    throw ValidationError("snapshot: metadata lacks the field list");
  if (s.metadata.value("dtype", "") != "float64" || s.metadata.value("endianness", "") != "little")
    throw ValidationError("snapshot: only little-endian float64 payloads are supported");
  std::int64_t total = 0;
  for (const auto& f : s.metadata["fields"]) {
    SnapshotField sf;
    sf.name = f.at("name").get<std::string>();
    sf.shape = f.at("shape").get<std::vector<std::int64_t>>();
    total += element_count(sf.shape);
    s.fields.push_back(std::move(sf));
  }
  if (static_cast<std::uint64_t>(total) * 8 != bytes.size() - pos) {
    std::ostringstream os;
    os << "snapshot: payload has " << bytes.size() - pos << " bytes, metadata declares " << total * 8;
    throw ValidationError(os.str());
  }
  for (auto& f : s.fields) {
    f.data.resize(static_cast<std::size_t>(element_count(f.shape)));
    for (auto& v : f.data) v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos));
  }
  return s;
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& s) {
  const std::string bytes = encode_snapshot(s);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("snapshot: cannot write " + path.string());
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("snapshot: cannot read " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return decode_snapshot(buf.str());
}

Snapshot snapshot_2d(const SpectralField2D& omega, double t, const nlohmann::json& provenance) {
  const auto& g = omega.grid();
  Snapshot s;
  s.metadata["geometry"] = {{"type", "periodic2d"}, {"n", g.n()}, {"L", g.box_length()}};
  s.metadata["time"] = t;
  if (!provenance.is_null()) s.metadata["provenance"] = provenance;
  const auto& v = omega.values();
  s.fields.push_back({"omega", {g.n(), g.n()}, std::vector<double>(v.data(), v.data() + v.size())});
  return s;
}

SpectralField2D field_from_snapshot(const Snapshot& s, double* t) {
  const auto& geo = s.metadata.at("geometry");
  if (geo.value("type", "") != "periodic2d") throw ValidationError("snapshot: not a periodic2d snapshot");
  const GridSpec2D g(geo.at("n").get<int>(), geo.at("L").get<double>());
  const auto& f = s.field("omega");
  if (f.shape != std::vector<std::int64_t>{g.n(), g.n()}) throw ValidationError("snapshot: omega shape mismatch");
  RealArray2 v = Eigen::Map<const RealArray2>(f.data.data(), g.n(), g.n());
  if (t) *t = s.metadata.value("time", 0.0);
  return SpectralField2D::from_values(g, std::move(v));
}

Snapshot snapshot_axi(const AxiState& st, const nlohmann::json& provenance) {
  const auto& g = st.grid();
  Snapshot s;
  s.metadata["geometry"] = {{"type", "axi"}, {"n_r", g.n_r()}, {"n_z", g.n_z()}, {"R_max", g.r_max()}, {"L_z", g.l_z()}};
  s.metadata["time"] = st.t();
  if (!provenance.is_null()) s.metadata["provenance"] = provenance;
  const auto& q = st.q();
  s.fields.push_back({"q", {g.n_r(), g.n_z()}, std::vector<double>(q.data(), q.data() + q.size())});
  return s;
}

AxiState axi_state_from_snapshot(const Snapshot& s) {
  const auto& geo = s.metadata.at("geometry");
  if (geo.value("type", "") != "axi") throw ValidationError("snapshot: not an axi snapshot");
  const AxiGrid g(geo.at("n_r").get<int>(), geo.at("n_z").get<int>(), geo.at("R_max").get<double>(),
                  geo.at("L_z").get<double>());
  const auto& f = s.field("q");
  if (f.shape != std::vector<std::int64_t>{g.n_r(), g.n_z()}) throw ValidationError("snapshot: q shape mismatch");
  AxiField q = Eigen::Map<const AxiField>(f.data.data(), g.n_r(), g.n_z());
  return AxiState(g, std::move(q), s.metadata.value("time", 0.0));
}

}  // namespace eulab
