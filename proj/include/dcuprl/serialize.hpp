#pragma once
#include <map>
#include <string>
#include <vector>

#include "dcuprl/tensor.hpp"

namespace dcuprl {

/**
 * Binary tensor-map container.
 *
 * Layout: magic "DCPL", version u32, then one record per tensor:
 *   name length u16, name bytes (UTF-8), rank u8, dims u32 each,
 *   data as little-endian f32. All integers little-endian.
 * Round-trips are bit-exact.
 */
inline constexpr std::uint32_t kDcplVersion = 1;

void save_tensor_map(const std::string& path, const std::map<std::string, const Tensor*>& tensors);
std::map<std::string, Tensor> load_tensor_map(const std::string& path);

} // namespace dcuprl
