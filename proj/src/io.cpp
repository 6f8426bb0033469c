#include "rrho/io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rrho {

namespace {

std::vector<std::string> split_csv_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& cell, long line_no) {
    try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": cannot parse '" + cell + "'");
    }
}

}  // namespace

LoadResult load_point_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("line 1: empty file");
    auto header = split_csv_line(line);
    if (header.empty() || header[0] != "w") {
        throw ParseError("line 1: header must be w,x1,...,xd");
    }
    int dim = static_cast<int>(header.size()) - 1;
    if (dim < 1) throw ParseError("line 1: need at least one coordinate column");

    std::vector<double> coords, weights;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != dim + 1) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(dim + 1) + " fields, got " +
                             std::to_string(cells.size()));
        }
        double w = parse_double(cells[0], line_no);
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ParseError("line " + std::to_string(line_no) + ": weight must be nonnegative");
        }
        weights.push_back(w);
        for (int k = 1; k <= dim; ++k) coords.push_back(parse_double(cells[static_cast<std::size_t>(k)], line_no));
    }
    if (weights.empty()) throw ParseError("no data rows");

    double sum = 0.0;
    for (double w : weights) sum += w;
    if (!(sum > 0.0)) throw WeightSumError("weights sum to zero");

    LoadResult res;
    res.raw_weight_sum = sum;
    double off = std::abs(sum - 1.0);
    if (off > 1e-2) {
        throw WeightSumError("weights sum to " + std::to_string(sum) +
                             "; more than 1e-2 away from 1");
    }
    res.renormalized_warning = off > 1e-6;
    res.points = WeightedPointSet::make(dim, std::move(coords), std::move(weights));
    return res;
}

nlohmann::json params_to_json(const SolverParams& p) {
    nlohmann::json j;
    j["eps"] = p.eps;
    j["sigma"] = p.sigma;
    j["sigma_mu"] = p.sigma_mu;
    j["sigma_nu"] = p.sigma_nu;
    j["eps1"] = p.eps1;
    j["eps2"] = p.eps2;
    j["tau"] = p.tau;
    j["lambda"] = p.lambda;
    j["delta"] = p.delta;
    j["max_iters"] = p.max_iters;
    j["mode"] = to_string(p.mode);
    j["c0"] = p.c0;
    j["c1"] = p.c1;
    j["c2"] = p.c2;
    j["c3"] = p.c3;
    j["c4"] = p.c4;
    return j;
}

nlohmann::json report_to_json(const SolverReport& r) {
    nlohmann::json j;
    j["estimate"] = r.estimate;
    j["dual_value"] = r.dual_value;
    j["r"] = r.r;
    j["rho"] = r.rho;
    j["eps"] = r.params.eps;
    j["iterations"] = r.iterations;
    j["termination"] = to_string(r.termination);
    j["alpha_updates"] = r.alpha_updates;
    j["beta_updates"] = r.beta_updates;
    j["seed"] = r.seed;
    j["mode"] = to_string(r.params.mode);
    j["engine"] = to_string(r.engine);
    j["wall_time_ms"] = r.wall_time_ms;
    j["params"] = params_to_json(r.params);
    return j;
}

}  // namespace rrho
