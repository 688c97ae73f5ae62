#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "rembed/error.hpp"
#include "rembed/io.hpp"

namespace rembed {

namespace {

constexpr std::uint8_t kMagic[4] = {'R', 'M', 'B', 'D'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 3 * 8;

class Writer {
public:
    void u32(std::uint32_t v) {
        for (int s = 0; s < 32; s += 8) bytes_.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void u64(std::uint64_t v) {
        for (int s = 0; s < 64; s += 8) bytes_.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void f64s(std::span<const double> vs) {
        for (double v : vs) f64(v);
    }
    void raw(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
    std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int s = 0; s < 32; s += 8) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << s;
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int s = 0; s < 64; s += 8) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << s;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::vector<double> f64s(std::size_t n) {
        std::vector<double> out(n);
        for (double& v : out) v = f64();
        return out;
    }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t len) {
    uLong crc = crc32(0L, Z_NULL, 0);
    while (len > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(len, std::numeric_limits<uInt>::max()));
        crc = crc32(crc, data, chunk);
        data += chunk;
        len -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

// a * b, failing on overflow.
bool mul_checked(std::uint64_t a, std::uint64_t b, std::uint64_t& out) {
    return !__builtin_mul_overflow(a, b, &out);
}

}  // namespace

bool has_regressor(const LinearPredictor& model) noexcept { return model.regressor.rows() > 0; }

std::vector<std::uint8_t> serialize_model(const LinearPredictor& model) {
    const std::size_t c = model.embedding.basis.rows();
    const std::size_t k = model.embedding.basis.cols();
    const std::size_t d = model.regressor.rows();
    if (model.embedding.spectrum.size() != k)
        throw InvalidArgument("save_model: spectrum length does not match embedding rank");
    if (d > 0 && model.regressor.cols() != k)
        throw InvalidArgument("save_model: regressor rank does not match embedding rank");

    Writer w;
    w.raw(kMagic);
    w.u32(kModelFormatVersion);
    w.u64(c);
    w.u64(d);
    w.u64(k);
    w.f64s(model.embedding.spectrum);
    w.f64s(model.embedding.basis.values());
    if (d > 0) w.f64s(model.regressor.values());
    const std::uint32_t crc = crc32_of(w.bytes().data(), w.bytes().size());
    w.u32(crc);
    return std::move(w.bytes());
}

LinearPredictor deserialize_model(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw ModelFormatError("not a model file (bad magic)");
    if (bytes.size() < kHeaderBytes + 4) throw ModelFormatError("model file truncated in header");

    Reader r(bytes);
    r.u32();  // magic
    const std::uint32_t version = r.u32();
    if (version != kModelFormatVersion)
        throw ModelFormatError("unsupported model format version " + std::to_string(version) + " (expected " +
                               std::to_string(kModelFormatVersion) + ")");
    const std::uint64_t c = r.u64();
    const std::uint64_t d = r.u64();
    const std::uint64_t k = r.u64();

    std::uint64_t ck = 0, dk = 0, doubles = 0, payload = 0;
    if (!mul_checked(c, k, ck) || !mul_checked(d, k, dk) || __builtin_add_overflow(ck, dk, &doubles) ||
        __builtin_add_overflow(doubles, k, &doubles) || !mul_checked(doubles, 8, payload) ||
        __builtin_add_overflow(payload, kHeaderBytes + 4, &payload))
        throw ModelFormatError("model header dimensions overflow");
    if (bytes.size() < payload) throw ModelFormatError("model file truncated");
    if (bytes.size() > payload) throw ModelFormatError("model file has trailing bytes");

    std::uint32_t stored_crc = 0;
    for (int s = 0; s < 4; ++s) stored_crc |= static_cast<std::uint32_t>(bytes[payload - 4 + s]) << (8 * s);
    if (crc32_of(bytes.data(), payload - 4) != stored_crc) throw ModelFormatError("model checksum mismatch");

    LinearPredictor model;
    model.embedding.spectrum = r.f64s(k);
    model.embedding.basis = DenseMatrix(c, k, r.f64s(ck));
    model.regressor = DenseMatrix(d, k, r.f64s(dk));
    model.ridge_used = std::numeric_limits<double>::quiet_NaN();
    return model;
}

void save_model(const LinearPredictor& model, const std::filesystem::path& path) {
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write model '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failure on '" + path.string() + "'");
}

LinearPredictor load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace rembed
