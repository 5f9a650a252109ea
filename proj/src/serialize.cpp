#include "dcuprl/serialize.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace dcuprl {
namespace {

// The build targets little-endian hosts; serialization just streams
// native-order bytes. A big-endian port would need byte swaps here.
static_assert(sizeof(float) == 4, "f32 storage assumed");

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ConfigError("truncated tensor file");
    return v;
}

} // namespace

void save_tensor_map(const std::string& path, const std::map<std::string, const Tensor*>& tensors) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out.write("DCPL", 4);
    put<std::uint32_t>(out, kDcplVersion);
    for (const auto& [name, t] : tensors) {
        if (name.size() > 0xffff) throw ContractError("tensor name too long: " + name);
        put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put<std::uint8_t>(out, static_cast<std::uint8_t>(t->rank()));
        for (int d : t->shape) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
        out.write(reinterpret_cast<const char*>(t->data.data()),
                  static_cast<std::streamsize>(t->data.size() * sizeof(float)));
    }
    if (!out) throw ConfigError("write failed: " + path);
}

std::map<std::string, Tensor> load_tensor_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "DCPL", 4) != 0)
        throw ConfigError("bad magic in " + path + " (not a DCPL file)");
    const auto version = get<std::uint32_t>(in);
    if (version != kDcplVersion)
        throw ConfigError("unsupported DCPL version " + std::to_string(version) + " in " + path);

    std::map<std::string, Tensor> out;
    while (true) {
        std::uint16_t name_len;
        in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
        if (in.eof()) break;
        if (!in) throw ConfigError("truncated tensor file: " + path);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const auto rank = get<std::uint8_t>(in);
        std::vector<int> shape(rank);
        for (auto& d : shape) d = static_cast<int>(get<std::uint32_t>(in));
        Tensor t = Tensor::zeros(shape);
        in.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(float)));
        if (!in) throw ConfigError("truncated tensor data for '" + name + "' in " + path);
        if (out.count(name)) throw ConfigError("duplicate tensor name '" + name + "' in " + path);
        out.emplace(std::move(name), std::move(t));
    }
    return out;
}

} // namespace dcuprl
