#include "mtlf/checkpoint.hpp"

#include "mtlf/errors.hpp"

#include <json.hpp>
#include <fmt/format.h>

#include <fstream>

namespace mtlf {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "mtlf-checkpoint-v1";

void read_values(const json& j, ad::Param& p) {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    const auto& values = j.at("values");
    if (rows != p.rows || cols != p.cols || values.size() != p.value.size())
        throw DataError(fmt::format("checkpoint: param '{}' has shape {}x{} (expected {}x{})", p.tag, rows, cols,
                                    p.rows, p.cols));
    for (std::size_t i = 0; i < values.size(); ++i) p.value[i] = values[i].get<double>();
}

} // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
    const auto& net = ckpt.network;
    json j;
    j["format"] = kFormat;
    j["state_size"] = net.state_size;
    j["seed"] = net.seed;
    const auto layout = net.layout();
    j["layout"] = {{"dilations", layout.dilations}, {"residual", layout.residual}};
    j["hyperparameters"] = ckpt.hyperparameters;
    json params = json::array();
    for (const ad::Param* p : net.params())
        params.push_back({{"tag", p->tag}, {"rows", p->rows}, {"cols", p->cols}, {"values", p->value}});
    j["params"] = std::move(params);
    json seasons = json::array();
    for (const auto& s : ckpt.seasons)
        seasons.push_back({{"series_id", s.series_id},
                           {"initial_components", s.initial_components.value},
                           {"beta_raw", s.beta_raw.value[0]}});
    j["seasonal"] = std::move(seasons);
    out << j.dump(1) << '\n';
}

Checkpoint read_checkpoint(std::istream& in) {
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(fmt::format("checkpoint: invalid JSON ({})", e.what()));
    }
    try {
        if (j.at("format").get<std::string>() != kFormat)
            throw DataError(fmt::format("checkpoint: unsupported format '{}'", j.at("format").get<std::string>()));
        rdlstm::NetworkLayout layout;
        layout.dilations = j.at("layout").at("dilations").get<std::array<std::size_t, rdlstm::kLayers>>();
        layout.residual = j.at("layout").at("residual").get<std::array<bool, rdlstm::kLayers>>();
        Checkpoint ckpt;
        ckpt.network = rdlstm::init_network(j.at("state_size").get<std::size_t>(), j.at("seed").get<std::uint64_t>(),
                                            layout);
        auto params = ckpt.network.params();
        const auto& jp = j.at("params");
        if (jp.size() != params.size())
            throw DataError(fmt::format("checkpoint: {} params (expected {})", jp.size(), params.size()));
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (jp[i].at("tag").get<std::string>() != params[i]->tag)
                throw DataError(fmt::format("checkpoint: param {} is '{}' (expected '{}')", i,
                                            jp[i].at("tag").get<std::string>(), params[i]->tag));
            read_values(jp[i], *params[i]);
        }
        ckpt.hyperparameters = j.at("hyperparameters").get<std::map<std::string, std::string>>();
        for (const auto& js : j.at("seasonal")) {
            seasonal::SeasonalState s(js.at("series_id").get<std::string>());
            const auto comps = js.at("initial_components").get<std::vector<double>>();
            if (comps.size() != kMonths) throw DataError("checkpoint: seasonal state needs 12 components");
            s.initial_components.value = comps;
            s.beta_raw.value[0] = js.at("beta_raw").get<double>();
            ckpt.seasons.push_back(std::move(s));
        }
        return ckpt;
    } catch (const json::exception& e) {
        throw DataError(fmt::format("checkpoint: malformed ({})", e.what()));
    }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream out(path);
    if (!out) throw DataError(fmt::format("cannot write checkpoint '{}'", path.string()));
    write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open checkpoint '{}'", path.string()));
    return read_checkpoint(in);
}

} // namespace mtlf
