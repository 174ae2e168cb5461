// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#include "pilotcs/design_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace pilotcs
{

namespace
{

// Stored designs are read back at this relative power tolerance.
constexpr double kReadPowerTol = 1e-9;

std::ofstream open_out(const std::filesystem::path &path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    return f;
}

} // namespace

std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

nlohmann::json design_to_json(const PilotDesign &design)
{
    nlohmann::json j;
    j["K"] = design.num_subcarriers();
    j["M"] = design.seq_len;
    j["Nt"] = design.num_tx();
    j["Pt"] = design.total_power;
    j["allocation"] = design.allocation;
    auto re = nlohmann::json::array(), im = nlohmann::json::array();
    for (Eigen::Index r = 0; r < design.x.rows(); ++r) {
        auto rr = nlohmann::json::array(), ri = nlohmann::json::array();
        for (Eigen::Index c = 0; c < design.x.cols(); ++c) {
            rr.push_back(design.x(r, c).real());
            ri.push_back(design.x(r, c).imag());
        }
        re.push_back(std::move(rr));
        im.push_back(std::move(ri));
    }
    j["x_real"] = std::move(re);
    j["x_imag"] = std::move(im);
    return j;
}

PilotDesign design_from_json(const nlohmann::json &j)
{
    for (const char *k : {"K", "M", "Nt", "Pt", "allocation", "x_real", "x_imag"})
        if (!j.contains(k))
            throw std::invalid_argument(std::string("design json: missing field '") + k + "'");
    PilotDesign d;
    int K = 0, Nt = 0;
    try {
        K = j.at("K").get<int>();
        Nt = j.at("Nt").get<int>();
        d.seq_len = j.at("M").get<int>();
        d.total_power = j.at("Pt").get<double>();
        d.allocation = j.at("allocation").get<std::vector<int>>();
    } catch (const nlohmann::json::exception &e) {
        throw std::invalid_argument(std::string("design json: ") + e.what());
    }
    if (K < 1 || Nt < 1 || d.seq_len < 1)
        throw std::invalid_argument("design json: K, M and Nt must be >= 1");
    const auto &re = j.at("x_real"), &im = j.at("x_imag");
    const Eigen::Index cols = static_cast<Eigen::Index>(K) * d.seq_len;
    if (!re.is_array() || !im.is_array() || re.size() != static_cast<std::size_t>(Nt) || im.size() != re.size())
        throw std::invalid_argument("design json: x_real/x_imag must have Nt rows");
    d.x.resize(Nt, cols);
    for (int r = 0; r < Nt; ++r) {
        if (!re[r].is_array() || !im[r].is_array() || re[r].size() != static_cast<std::size_t>(cols) ||
            im[r].size() != static_cast<std::size_t>(cols))
            throw std::invalid_argument("design json: each x row must hold M*K entries");
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!re[r][c].is_number() || !im[r][c].is_number())
                throw std::invalid_argument("design json: non-numeric pilot entry");
            d.x(r, c) = {re[r][c].get<double>(), im[r][c].get<double>()};
        }
    }
    if (!d.x.allFinite())
        throw std::invalid_argument("design json: non-finite pilot entry");
    if (d.allocation.empty())
        throw std::invalid_argument("design json: allocation is empty");
    d.validate(kReadPowerTol);
    return d;
}

void write_design(const std::filesystem::path &path, const PilotDesign &design)
{
    auto f = open_out(path);
    f << design_to_json(design).dump(1) << '\n';
}

PilotDesign read_design(const std::filesystem::path &path)
{
    std::ifstream f(path);
    if (!f)
        throw std::invalid_argument("cannot read design '" + path.string() + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception &e) {
        throw std::invalid_argument("design '" + path.string() + "': " + e.what());
    }
    return design_from_json(j);
}

void write_trace_csv(const std::filesystem::path &path, const OptimizationTrace &trace)
{
    auto f = open_out(path);
    f << "iteration,loss,f_term,g_term,grad_norm\n";
    for (const auto &r : trace.rows)
        f << r.iteration << ',' << format_double(r.loss) << ',' << format_double(r.f_term) << ','
          << format_double(r.g_term) << ',' << format_double(r.grad_norm) << '\n';
}

nlohmann::json coherence_summary_json(const CoherenceReport &report, const PilotDesign &design)
{
    nlohmann::json j;
    j["p"] = report.p;
    j["Q"] = design.allocation.size();
    j["allocation"] = design.allocation;
    j["omega"] = {{"mutual_coherence", report.mutual_coherence},
                  {"generalized_coherence", report.generalized_p},
                  {"welch_bound", report.welch_bound},
                  {"N", report.n},
                  {"G", report.g}};
    j["psi"] = {{"mutual_coherence", report.psi_mutual_coherence},
                {"generalized_coherence", report.psi_generalized_p},
                {"welch_bound", report.psi_welch_bound},
                {"N", report.psi_n},
                {"G", report.psi_g}};
    j["cdf_subsampled"] = report.subsampled;
    j["cdf_pairs"] = report.inner_product_cdf.size();
    return j;
}

void write_cdf_csv(const std::filesystem::path &path, const std::string &kind, const std::vector<double> &values)
{
    auto f = open_out(path);
    f << "kind,value\n";
    for (double v : values)
        f << kind << ',' << format_double(v) << '\n';
}

void write_text(const std::filesystem::path &path, const std::string &text)
{
    auto f = open_out(path);
    f << text;
}

} // namespace pilotcs
