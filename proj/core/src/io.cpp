#include "nccz/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace nccz {

using nlohmann::json;

json grid_to_json(const GridSpec& g) {
    return json{{"n", g.n}, {"K", g.K}, {"d", g.d}, {"quad_refine", g.quad_refine}};
}

GridSpec grid_from_json(const json& j) {
    GridSpec g;
    g.n = j.at("n").get<int>();
    g.K = j.at("K").get<int>();
    g.d = j.at("d").get<int>();
    g.quad_refine = j.value("quad_refine", 4);
    g.validate();
    return g;
}

json field_to_json(const OperatorField& f) {
    json cells = json::array();
    const int d = f.dim();
    for (std::int64_t c = 0; c < f.cell_count(); ++c) {
        json entries = json::array();
        for (int r = 0; r < d; ++r)
            for (int col = 0; col < d; ++col) {
                const Complex v = f.value(c)(r, col);
                entries.push_back(json::array({v.real(), v.imag()}));
            }
        cells.push_back(std::move(entries));
    }
    return json{{"grid", grid_to_json(f.grid())}, {"level", f.level()}, {"cells", std::move(cells)}};
}

OperatorField field_from_json(const json& j) {
    const GridSpec g = grid_from_json(j.at("grid"));
    const int level = j.at("level").get<int>();
    const auto& cells = j.at("cells");
    std::vector<Mat> vals;
    vals.reserve(cells.size());
    for (const auto& entries : cells) {
        if (static_cast<int>(entries.size()) != g.d * g.d)
            throw std::invalid_argument("field_from_json: wrong entry count per cell");
        Mat m(g.d, g.d);
        int idx = 0;
        for (int r = 0; r < g.d; ++r)
            for (int col = 0; col < g.d; ++col) {
                const auto& e = entries.at(idx++);
                m(r, col) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
            }
        vals.push_back(std::move(m));
    }
    return OperatorField(g, level, std::move(vals));
}

void atomic_write(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp);
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("atomic_write: short write on " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error("atomic_write: rename failed for " + path);
    }
}

}  // namespace nccz
