#include "nixforge/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "nixforge/error.hpp"

namespace nixforge {

namespace {

constexpr char kMagic[4] = {'N', 'I', 'X', 'T'};
constexpr uint8_t kDtypeF32 = 0;

void put_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

struct Reader {
    const std::string& bytes;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > bytes.size())
            throw CheckpointError(CheckpointError::Kind::truncated,
                                  "checkpoint truncated at byte " +
                                      std::to_string(pos));
    }
    uint8_t u8() {
        need(1);
        return static_cast<uint8_t>(bytes[pos++]);
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint8_t>(bytes[pos]) |
                     (static_cast<uint16_t>(static_cast<uint8_t>(bytes[pos + 1]))
                      << 8);
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(static_cast<uint8_t>(bytes[pos + i]))
                 << (8 * i);
        pos += 4;
        return v;
    }
    float f32() {
        uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    std::string str(size_t n) {
        need(n);
        std::string s = bytes.substr(pos, n);
        pos += n;
        return s;
    }
};

} // namespace

const Tensor& Checkpoint::get(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end())
        throw CheckpointError(CheckpointError::Kind::missing_tensor,
                              "checkpoint has no tensor named '" + name + "'");
    return it->second;
}

void Checkpoint::put(const std::string& name, Tensor t) {
    if (name.empty() || name.size() > 256)
        throw CheckpointError(CheckpointError::Kind::invalid_value,
                              "tensor name must be 1..256 bytes");
    tensors[name] = std::move(t);
}

void Checkpoint::set_config_text(const std::string& text) {
    std::vector<float> data(text.size());
    for (size_t i = 0; i < text.size(); ++i)
        data[i] = static_cast<float>(static_cast<unsigned char>(text[i]));
    put(kConfigTensor, Tensor({static_cast<int>(text.size())}, std::move(data)));
}

std::string Checkpoint::config_text() const {
    const Tensor& t = get(kConfigTensor);
    std::string s;
    s.reserve(t.size());
    for (float v : t.values()) s.push_back(static_cast<char>(v));
    return s;
}

std::string save_checkpoint_bytes(const Checkpoint& ckpt) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, ckpt.version);
    put_u32(out, static_cast<uint32_t>(ckpt.tensors.size()));
    for (const auto& [name, tensor] : ckpt.tensors) {
        if (name.empty() || name.size() > 256)
            throw CheckpointError(CheckpointError::Kind::invalid_value,
                                  "tensor name must be 1..256 bytes: '" + name +
                                      "'");
        put_u16(out, static_cast<uint16_t>(name.size()));
        out.append(name);
        out.push_back(static_cast<char>(kDtypeF32));
        out.push_back(static_cast<char>(tensor.rank()));
        for (int d : tensor.dims()) put_u32(out, static_cast<uint32_t>(d));
        for (float v : tensor.values()) put_f32(out, v);
    }
    return out;
}

Checkpoint load_checkpoint_bytes(const std::string& bytes) {
    Reader r{bytes};
    std::string magic = r.str(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0)
        throw CheckpointError(CheckpointError::Kind::bad_magic,
                              "bad checkpoint magic '" + magic + "'");
    Checkpoint ckpt;
    ckpt.version = r.u32();
    uint32_t count = r.u32();
    for (uint32_t i = 0; i < count; ++i) {
        uint16_t name_len = r.u16();
        std::string name = r.str(name_len);
        uint8_t dtype = r.u8();
        if (dtype != kDtypeF32)
            throw CheckpointError(CheckpointError::Kind::unsupported_dtype,
                                  "tensor '" + name + "' has dtype " +
                                      std::to_string(dtype) +
                                      ", only f32 (0) is supported");
        uint8_t rank = r.u8();
        if (rank < 1 || rank > 3)
            throw CheckpointError(CheckpointError::Kind::invalid_value,
                                  "tensor '" + name + "' has rank " +
                                      std::to_string(rank));
        std::vector<int> dims(rank);
        size_t total = 1;
        for (auto& d : dims) {
            d = static_cast<int>(r.u32());
            total *= static_cast<size_t>(d);
        }
        std::vector<float> data(total);
        for (auto& v : data) v = r.f32();
        if (ckpt.tensors.count(name))
            throw CheckpointError(CheckpointError::Kind::duplicate_name,
                                  "duplicate tensor name '" + name + "'");
        ckpt.tensors.emplace(std::move(name), Tensor(std::move(dims), std::move(data)));
    }
    return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::string bytes = save_checkpoint_bytes(ckpt);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw CheckpointError(CheckpointError::Kind::io,
                              "cannot open '" + path + "' for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f.good())
        throw CheckpointError(CheckpointError::Kind::io,
                              "write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw CheckpointError(CheckpointError::Kind::io,
                              "cannot open '" + path + "' for reading");
    std::string bytes((std::istreambuf_iterator<char>(f)),
                      std::istreambuf_iterator<char>());
    return load_checkpoint_bytes(bytes);
}

} // namespace nixforge
