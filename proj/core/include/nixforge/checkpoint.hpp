#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "nixforge/tensor.hpp"

namespace nixforge {

// Single-file weight container. Byte layout, all integers little-endian:
//   magic "NIXT" | version u32 | tensor_count u32
//   per tensor (in lexicographic name order):
//     name_len u16 | name UTF-8 | dtype u8 (0 = f32) | rank u8 |
//     dims rank x u32 | payload f32 row-major
// The sorted tensor map makes save(load(x)) reproduce the file byte for byte.
struct Checkpoint {
    static constexpr uint32_t kFormatVersion = 1;
    static constexpr const char* kConfigTensor = "__config";

    uint32_t version = kFormatVersion;
    std::map<std::string, Tensor> tensors;

    bool has(const std::string& name) const { return tensors.count(name) != 0; }
    const Tensor& get(const std::string& name) const;
    void put(const std::string& name, Tensor t);

    // Configuration rides along as the reserved "__config" tensor whose
    // float values are the UTF-8 bytes of the config text.
    void set_config_text(const std::string& text);
    std::string config_text() const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

std::string save_checkpoint_bytes(const Checkpoint& ckpt);
Checkpoint load_checkpoint_bytes(const std::string& bytes);

} // namespace nixforge
