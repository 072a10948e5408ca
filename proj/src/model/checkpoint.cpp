#include "hnmvts/error.hpp"
#include "hnmvts/model.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

namespace hnmvts {

namespace {

constexpr std::array<char, 8> kMagic{'H', 'N', 'M', 'V', 'T', 'S', 'C', 'K'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::istream& in, const std::filesystem::path& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw FormatError(fmt::format("{}: truncated checkpoint header", path.string()));
    }
    return v;
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const ForecastModel& model, const nlohmann::ordered_json& meta) {
    nlohmann::ordered_json header;
    header["format"] = "hnmvts-checkpoint";
    header["version"] = kCheckpointVersion;
    header["form"] = to_string(model.form());
    header["config"] = to_json(model.config());
    header["meta"] = meta;
    auto& tensors = header["tensors"] = nlohmann::ordered_json::array();
    std::uint64_t offset = 0;
    for (const auto& p : model.parameters()) {
        tensors.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"trainable", p.trainable}, {"offset", offset}});
        offset += p.value.size();
    }
    const std::string text = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(fmt::format("{}: cannot open for writing", path.string()));
    out.write(kMagic.data(), kMagic.size());
    write_pod<std::uint32_t>(out, kCheckpointVersion);
    write_pod<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& p : model.parameters()) {
        for (Real v : p.value.data()) write_pod<double>(out, static_cast<double>(v));
    }
    if (!out) throw FormatError(fmt::format("{}: write failed", path.string()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(fmt::format("{}: cannot open checkpoint", path.string()));
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
        throw FormatError(fmt::format("{}: not an hnmvts checkpoint", path.string()));
    }
    const auto version = read_pod<std::uint32_t>(in, path);
    if (version != kCheckpointVersion) {
        throw FormatError(fmt::format("{}: checkpoint version {} (this build reads {})", path.string(), version,
                                      kCheckpointVersion));
    }
    const auto header_len = read_pod<std::uint64_t>(in, path);
    std::string text(header_len, '\0');
    if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) {
        throw FormatError(fmt::format("{}: truncated checkpoint header", path.string()));
    }

    nlohmann::ordered_json header;
    try {
        header = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(fmt::format("{}: bad checkpoint header: {}", path.string(), e.what()));
    }

    std::vector<Parameter> params;
    try {
        for (const auto& t : header.at("tensors")) {
            Shape shape = t.at("shape").get<Shape>();
            std::vector<Real> values(shape_size(shape));
            for (auto& v : values) {
                double d = 0;
                if (!in.read(reinterpret_cast<char*>(&d), sizeof d)) {
                    throw FormatError(fmt::format("{}: truncated payload in tensor '{}'", path.string(),
                                                  t.at("name").get<std::string>()));
                }
                v = static_cast<Real>(d);
            }
            params.push_back({t.at("name").get<std::string>(), Tensor(std::move(shape), std::move(values)),
                              t.at("trainable").get<bool>()});
        }
        ForecastModel model(model_config_from_json(header.at("config")),
                            parse_model_form(header.at("form").get<std::string>()), std::move(params));
        return Checkpoint{std::move(model), header.at("meta")};
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(fmt::format("{}: bad checkpoint header: {}", path.string(), e.what()));
    }
}

} // namespace hnmvts
