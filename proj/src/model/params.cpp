// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/model/params.hpp"

#include <random>

#include "glow/io/binary.hpp"
#include "glow/model/rope.hpp"

namespace glow {
namespace {

constexpr std::string_view kMagic = "GLWT";
constexpr std::uint32_t kVersion = 1;

template <typename M>
Weights<M> skeleton(const Hyper& h) {
  Weights<M> w;
  w.layers.resize(h.layers);
  w.classifiers.resize(h.layers > 0 ? h.layers - 1 : 0);
  return w;
}

}  // namespace

void Hyper::validate() const {
  if (layers == 0) throw InvalidInput("model needs at least one layer");
  if (heads == 0 || dim == 0 || dim % heads != 0)
    throw InvalidInput("model width " + std::to_string(dim) + " not divisible by " +
                       std::to_string(heads) + " heads");
  if (head_dim() % 2 != 0) throw InvalidInput("per-head width must be even for rotary encoding");
  if (input_dim == 0) throw InvalidInput("descriptor width must be positive");
}

template <typename T>
std::vector<Matrix<T>*> ModelParams<T>::flat() {
  std::vector<Matrix<T>*> out;
  Weights<Matrix<T>>::each(weights, [&](const std::string&, Matrix<T>& m) { out.push_back(&m); });
  return out;
}

template <typename T>
std::vector<const Matrix<T>*> ModelParams<T>::flat() const {
  std::vector<const Matrix<T>*> out;
  Weights<Matrix<T>>::each(weights, [&](const std::string&, const Matrix<T>& m) { out.push_back(&m); });
  return out;
}

template <typename T>
std::vector<std::string> ModelParams<T>::names() const {
  std::vector<std::string> out;
  Weights<Matrix<T>>::each(weights, [&](const std::string& n, const Matrix<T>&) { out.push_back(n); });
  return out;
}

template <typename T>
std::size_t ModelParams<T>::scalar_count() const {
  std::size_t n = 0;
  for (const Matrix<T>* m : flat()) n += m->size();
  return n;
}

template <typename T>
bool bit_equal(const ModelParams<T>& a, const ModelParams<T>& b) {
  if (!(a.hyper == b.hyper)) return false;
  auto fa = a.flat();
  auto fb = b.flat();
  if (fa.size() != fb.size()) return false;
  for (std::size_t i = 0; i < fa.size(); ++i)
    if (!bit_equal(*fa[i], *fb[i])) return false;
  return true;
}

template <typename T>
ModelParams<T> init_model(const Hyper& hyper, std::uint64_t seed) {
  hyper.validate();
  std::mt19937_64 rng(seed);
  const std::size_t d = hyper.dim;
  ModelParams<T> p;
  p.hyper = hyper;
  p.weights = skeleton<Matrix<T>>(hyper);
  p.weights.input = make_linear<T>(hyper.input_dim, d, rng);
  p.weights.rope_basis = init_rotary_basis<T>(hyper.head_dim(), rng);
  for (auto& layer : p.weights.layers) {
    layer.self.query = make_linear<T>(d, d, rng);
    layer.self.key = make_linear<T>(d, d, rng);
    layer.self.value = make_linear<T>(d, d, rng);
    layer.self.merge = make_linear<T>(d, d, rng);
    layer.self.update = make_mlp_block<T>(2 * d, 2 * d, d, rng);
    layer.cross.key = make_linear<T>(d, d, rng);
    layer.cross.value = make_linear<T>(d, d, rng);
    layer.cross.merge = make_linear<T>(d, d, rng);
    layer.cross.update = make_mlp_block<T>(2 * d, 2 * d, d, rng);
    layer.head.projection = make_linear<T>(d, d, rng);
    layer.head.matchability = make_linear<T>(d, 1, rng);
  }
  for (auto& c : p.weights.classifiers) c = make_linear<T>(d, 1, rng);
  return p;
}

template <typename T>
std::vector<const Var<T>*> BoundModel<T>::flat() const {
  std::vector<const Var<T>*> out;
  Weights<Var<T>>::each(weights, [&](const std::string&, const Var<T>& v) { out.push_back(&v); });
  return out;
}

template <typename T>
BoundModel<T> bind(const ModelParams<T>& params, Tape<T>* tape) {
  BoundModel<T> b;
  b.hyper = params.hyper;
  b.weights = skeleton<Var<T>>(params.hyper);
  std::vector<Var<T>*> targets;
  Weights<Var<T>>::each(b.weights, [&](const std::string&, Var<T>& v) { targets.push_back(&v); });
  auto sources = params.flat();
  require(sources.size() == targets.size(), "bind: parameter layout mismatch");
  for (std::size_t i = 0; i < sources.size(); ++i)
    *targets[i] = tape != nullptr ? tape->leaf(*sources[i]) : Var<T>(*sources[i]);
  return b;
}

template <typename T>
std::vector<Matrix<T>> gradients(const BoundModel<T>& bound, const Tape<T>& tape) {
  std::vector<Matrix<T>> out;
  for (const Var<T>* v : bound.flat()) out.push_back(tape.grad(*v));
  return out;
}

template <typename T>
std::vector<std::uint8_t> encode_weights(const ModelParams<T>& params, std::uint32_t scalar_bytes,
                                         std::span<const std::uint8_t> training_state) {
  require(scalar_bytes == 4 || scalar_bytes == 8, "weights: scalar width must be 4 or 8 bytes");
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u32(scalar_bytes);
  w.u32(params.hyper.layers);
  w.u32(params.hyper.dim);
  w.u32(params.hyper.heads);
  w.u32(params.hyper.input_dim);
  w.u64(params.scalar_count());
  for (const Matrix<T>* m : params.flat())
    for (T v : m->values()) {
      if (scalar_bytes == 4) w.f32(float(v)); else w.f64(double(v));
    }
  if (training_state.empty()) {
    w.u32(0);
  } else {
    w.u32(1);
    w.u64(training_state.size());
    w.bytes(std::string_view(reinterpret_cast<const char*>(training_state.data()), training_state.size()));
  }
  w.u64(fnv1a64(w.buffer()));
  return w.take();
}

namespace {

Hyper read_header(ByteReader& r, std::uint32_t* scalar_bytes) {
  if (r.remaining() < 4 || r.bytes(4) != kMagic)
    throw FormatError(FormatErrorCode::kBadMagic, 0, "expected GLWT");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw FormatError(FormatErrorCode::kUnsupportedVersion, 4, "version " + std::to_string(version));
  *scalar_bytes = r.u32();
  if (*scalar_bytes != 4 && *scalar_bytes != 8)
    throw FormatError(FormatErrorCode::kBadHeader, 8, "scalar width " + std::to_string(*scalar_bytes));
  Hyper h;
  h.layers = r.u32();
  h.dim = r.u32();
  h.heads = r.u32();
  h.input_dim = r.u32();
  try {
    h.validate();
  } catch (const InvalidInput& e) {
    throw FormatError(FormatErrorCode::kBadHeader, 12, e.what());
  }
  return h;
}

}  // namespace

template <typename T>
ModelParams<T> decode_weights(std::span<const std::uint8_t> bytes, WeightsFile* meta) {
  if (bytes.size() < 8) throw FormatError(FormatErrorCode::kTruncated, bytes.size(), "no checksum");
  ByteReader r(bytes);
  std::uint32_t scalar_bytes = 4;
  const Hyper hyper = read_header(r, &scalar_bytes);
  ModelParams<T> p = init_model<T>(hyper, 0);
  const std::size_t count_at = r.offset();
  const std::uint64_t count = r.u64();
  if (count != p.scalar_count())
    throw FormatError(FormatErrorCode::kBadHeader, count_at,
                      "scalar count " + std::to_string(count) + " != " + std::to_string(p.scalar_count()));
  for (Matrix<T>* m : p.flat())
    for (T& v : m->values()) v = scalar_bytes == 4 ? T(r.f32()) : T(r.f64());
  WeightsFile info;
  info.scalar_bytes = scalar_bytes;
  const std::size_t section_at = r.offset();
  const std::uint32_t section = r.u32();
  if (section == 1) {
    const std::uint64_t len = r.u64();
    const std::string raw = r.bytes(len);
    info.training_state.assign(raw.begin(), raw.end());
  } else if (section != 0) {
    throw FormatError(FormatErrorCode::kBadHeader, section_at, "unknown section flag");
  }
  const std::size_t sum_at = r.offset();
  const std::uint64_t stored = r.u64();
  if (r.remaining() != 0) throw FormatError(FormatErrorCode::kTrailingBytes, r.offset(), "");
  if (stored != fnv1a64(bytes.first(sum_at)))
    throw FormatError(FormatErrorCode::kChecksumMismatch, sum_at, "");
  if (meta != nullptr) *meta = std::move(info);
  return p;
}

template <typename T>
void save_weights(const ModelParams<T>& params, const std::filesystem::path& path,
                  std::uint32_t scalar_bytes, std::span<const std::uint8_t> training_state) {
  write_file_atomic(path, encode_weights(params, scalar_bytes, training_state));
}

template <typename T>
ModelParams<T> load_weights(const std::filesystem::path& path, WeightsFile* meta) {
  return decode_weights<T>(read_file(path), meta);
}

Hyper peek_hyper(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  ByteReader r(bytes);
  std::uint32_t scalar_bytes = 4;
  return read_header(r, &scalar_bytes);
}

#define GLOW_INSTANTIATE(T)                                                                     \
  template struct ModelParams<T>;                                                               \
  template struct BoundModel<T>;                                                                \
  template bool bit_equal(const ModelParams<T>&, const ModelParams<T>&);                        \
  template ModelParams<T> init_model<T>(const Hyper&, std::uint64_t);                           \
  template BoundModel<T> bind(const ModelParams<T>&, Tape<T>*);                                 \
  template std::vector<Matrix<T>> gradients(const BoundModel<T>&, const Tape<T>&);              \
  template std::vector<std::uint8_t> encode_weights(const ModelParams<T>&, std::uint32_t,       \
                                                    std::span<const std::uint8_t>);             \
  template ModelParams<T> decode_weights<T>(std::span<const std::uint8_t>, WeightsFile*);       \
  template void save_weights(const ModelParams<T>&, const std::filesystem::path&, std::uint32_t, \
                             std::span<const std::uint8_t>);                                    \
  template ModelParams<T> load_weights<T>(const std::filesystem::path&, WeightsFile*);

GLOW_INSTANTIATE(float)
GLOW_INSTANTIATE(double)

#undef GLOW_INSTANTIATE

}  // namespace glow
