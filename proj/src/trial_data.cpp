#include "carte/trial_data.hpp"

#include "carte/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace carte {

namespace {

using json = nlohmann::json;

std::string cell_name(int k, int a) {
    return "(stratum " + std::to_string(k) + ", arm " + std::to_string(a) + ")";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (std::isspace(static_cast<unsigned char>(s[b])) != 0)) ++b;
    while (e > b && (std::isspace(static_cast<unsigned char>(s[e - 1])) != 0)) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& tok, int row, const std::string& col) {
    const std::string t = trim(tok);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ParseError("non-numeric value '" + tok + "' at row " + std::to_string(row) +
                         ", column '" + col + "'");
    }
    return v;
}

int parse_int(const std::string& tok, int row, const std::string& col) {
    const std::string t = trim(tok);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ParseError("non-integer value '" + tok + "' at row " + std::to_string(row) +
                         ", column '" + col + "'");
    }
    return v;
}

void format_double(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

}  // namespace

TrialDataset::TrialDataset(Eigen::VectorXd y, std::vector<int> arm, std::vector<int> stratum,
                           Eigen::MatrixXd x, int declared_arms, int declared_strata,
                           std::vector<std::string> covariate_names)
    : y_(std::move(y)),
      arm_(std::move(arm)),
      stratum_(std::move(stratum)),
      x_(std::move(x)),
      covariate_names_(std::move(covariate_names)) {
    const auto n = y_.size();
    if (n < 1) throw InputError("dataset must contain at least one row");
    if (static_cast<Eigen::Index>(arm_.size()) != n ||
        static_cast<Eigen::Index>(stratum_.size()) != n || x_.rows() != n) {
        throw SchemaError("y, arm, stratum and x must have the same number of rows");
    }

    int max_arm = 0;
    int max_stratum = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (arm_[i] < 0) throw SchemaError("arm label " + std::to_string(arm_[i]) + " below 0");
        if (stratum_[i] < 1) {
            throw SchemaError("stratum label " + std::to_string(stratum_[i]) + " below 1");
        }
        max_arm = std::max(max_arm, arm_[i]);
        max_stratum = std::max(max_stratum, stratum_[i]);
        if (!std::isfinite(y_[i])) {
            throw InputError("non-finite outcome at row " + std::to_string(i + 1));
        }
    }
    if (!x_.allFinite()) throw InputError("non-finite covariate value");

    num_arms_ = declared_arms >= 0 ? declared_arms : max_arm;
    num_strata_ = declared_strata >= 1 ? declared_strata : max_stratum;
    if (num_arms_ < 1) num_arms_ = 1;
    if (max_arm > num_arms_) {
        throw SchemaError("arm label " + std::to_string(max_arm) + " exceeds declared A=" +
                          std::to_string(num_arms_));
    }
    if (max_stratum > num_strata_) {
        throw SchemaError("stratum label " + std::to_string(max_stratum) +
                          " exceeds declared K=" + std::to_string(num_strata_));
    }

    if (covariate_names_.empty()) {
        covariate_names_.reserve(x_.cols());
        for (Eigen::Index j = 0; j < x_.cols(); ++j) {
            covariate_names_.push_back("x" + std::to_string(j + 1));
        }
    } else if (static_cast<Eigen::Index>(covariate_names_.size()) != x_.cols()) {
        throw SchemaError("covariate name count does not match covariate matrix width");
    }
}

StrataIndex StrataIndex::build(const TrialDataset& d) {
    StrataIndex idx;
    idx.num_strata_ = d.num_strata();
    idx.num_arms_ = d.num_arms();
    idx.cells_.resize(static_cast<std::size_t>(idx.num_strata_) * (idx.num_arms_ + 1));
    idx.stratum_counts_.assign(idx.num_strata_, 0);
    for (int i = 0; i < d.n(); ++i) {
        const int k = d.stratum()[i];
        const int a = d.arm()[i];
        idx.cells_[idx.flat(k, a)].push_back(i);
        ++idx.stratum_counts_[k - 1];
    }
    return idx;
}

StratumArmStats compute_stats(const TrialDataset& d, const StrataIndex& idx) {
    const int K = idx.num_strata();
    const int A = idx.num_arms();
    const int p = d.dim();

    StratumArmStats st;
    st.num_strata = K;
    st.num_arms = A;
    st.dim = p;
    st.y_cell_mean.setZero(K, A + 1);
    st.x_cell_mean.assign(static_cast<std::size_t>(K) * (A + 1), Eigen::VectorXd::Zero(p));
    st.x_stratum_mean.assign(K, Eigen::VectorXd::Zero(p));
    st.stratum_prop.setZero(K);

    std::vector<long double> xacc(p);
    for (int k = 1; k <= K; ++k) {
        st.stratum_prop(k - 1) =
            static_cast<double>(idx.stratum_count(k)) / static_cast<double>(d.n());
        std::vector<long double> stratum_xacc(p, 0.0L);
        for (int a = 0; a <= A; ++a) {
            const auto& rows = idx.cell(k, a);
            if (rows.empty()) {
                throw DegenerateDesignError("empty cell " + cell_name(k, a), k, a);
            }
            long double yacc = 0.0L;
            std::fill(xacc.begin(), xacc.end(), 0.0L);
            for (const int i : rows) {
                yacc += d.y()(i);
                for (int j = 0; j < p; ++j) {
                    const long double v = d.x()(i, j);
                    xacc[j] += v;
                    stratum_xacc[j] += v;
                }
            }
            const auto cnt = static_cast<long double>(rows.size());
            st.y_cell_mean(k - 1, a) = static_cast<double>(yacc / cnt);
            Eigen::VectorXd& xm = st.x_cell_mean[(k - 1) * (A + 1) + a];
            for (int j = 0; j < p; ++j) xm(j) = static_cast<double>(xacc[j] / cnt);
        }
        const auto nk = static_cast<long double>(idx.stratum_count(k));
        Eigen::VectorXd& sm = st.x_stratum_mean[k - 1];
        for (int j = 0; j < p; ++j) sm(j) = static_cast<double>(stratum_xacc[j] / nk);
    }
    return st;
}

ValidationReport validate(const TrialDataset& d, int min_cell) {
    const StrataIndex idx = StrataIndex::build(d);
    const int K = idx.num_strata();
    const int A = idx.num_arms();
    const int p = d.dim();

    ValidationReport rep;
    rep.cell_counts.setZero(K, A + 1);
    for (int k = 1; k <= K; ++k) {
        for (int a = 0; a <= A; ++a) {
            const int cnt = idx.cell_count(k, a);
            rep.cell_counts(k - 1, a) = cnt;
            if (cnt < min_cell) rep.small_cells.push_back({k, a, cnt});
        }
        // zero-variance covariate columns within the stratum
        std::vector<int> rows;
        for (int a = 0; a <= A; ++a) {
            const auto& cell = idx.cell(k, a);
            rows.insert(rows.end(), cell.begin(), cell.end());
        }
        if (rows.empty()) continue;
        for (int j = 0; j < p; ++j) {
            const double first = d.x()(rows.front(), j);
            bool constant = true;
            for (const int i : rows) {
                if (d.x()(i, j) != first) {
                    constant = false;
                    break;
                }
            }
            if (constant) rep.zero_variance.push_back({k, j});
        }
    }
    return rep;
}

TrialDataset load_trial_csv(const std::string& path, const ColumnSpec& schema) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw InputError("empty file '" + path + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split_csv_line(line);
    int y_col = -1;
    int arm_col = -1;
    int stratum_col = -1;
    std::vector<int> x_cols;
    std::vector<std::string> x_names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string name = trim(header[c]);
        if (name == schema.outcome) {
            y_col = static_cast<int>(c);
        } else if (name == schema.arm) {
            arm_col = static_cast<int>(c);
        } else if (name == schema.stratum) {
            stratum_col = static_cast<int>(c);
        } else if (schema.covariates.empty() ||
                   std::find(schema.covariates.begin(), schema.covariates.end(), name) !=
                       schema.covariates.end()) {
            x_cols.push_back(static_cast<int>(c));
            x_names.push_back(name);
        }
    }
    if (y_col < 0) throw SchemaError("missing outcome column '" + schema.outcome + "'");
    if (arm_col < 0) throw SchemaError("missing arm column '" + schema.arm + "'");
    if (stratum_col < 0) throw SchemaError("missing stratum column '" + schema.stratum + "'");
    if (!schema.covariates.empty() && x_cols.size() != schema.covariates.size()) {
        throw SchemaError("not all requested covariate columns present");
    }

    std::vector<double> y;
    std::vector<int> arm;
    std::vector<int> stratum;
    std::vector<double> xdata;  // row-major staging
    const int p = static_cast<int>(x_cols.size());
    int row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const std::vector<std::string> toks = split_csv_line(line);
        if (toks.size() != header.size()) {
            throw ParseError("row " + std::to_string(row) + " has " +
                             std::to_string(toks.size()) + " fields, expected " +
                             std::to_string(header.size()));
        }
        y.push_back(parse_double(toks[y_col], row, schema.outcome));
        arm.push_back(parse_int(toks[arm_col], row, schema.arm));
        stratum.push_back(parse_int(toks[stratum_col], row, schema.stratum));
        for (int j = 0; j < p; ++j) {
            xdata.push_back(parse_double(toks[x_cols[j]], row, x_names[j]));
        }
    }
    if (row == 0) throw InputError("no data rows in '" + path + "'");

    int declared_arms = -1;
    int declared_strata = -1;
    const std::string sidecar = path + ".json";
    if (std::filesystem::exists(sidecar)) {
        std::ifstream sin(sidecar);
        json j;
        try {
            sin >> j;
        } catch (const json::exception& e) {
            throw ParseError("sidecar '" + sidecar + "': " + e.what());
        }
        for (const auto& [key, value] : j.items()) {
            if (key != "A" && key != "K" && key != "covariates" && key != "meta") {
                throw SchemaError("sidecar '" + sidecar + "': unknown key '" + key + "'");
            }
            (void)value;
        }
        if (j.contains("A")) declared_arms = j.at("A").get<int>();
        if (j.contains("K")) declared_strata = j.at("K").get<int>();
        if (j.contains("covariates")) {
            const auto names = j.at("covariates").get<std::vector<std::string>>();
            if (names != x_names) {
                throw SchemaError("sidecar covariate names do not match CSV header");
            }
        }
    }

    Eigen::VectorXd yv = Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    Eigen::MatrixXd x(row, p);
    for (int i = 0; i < row; ++i) {
        for (int j = 0; j < p; ++j) x(i, j) = xdata[static_cast<std::size_t>(i) * p + j];
    }
    return TrialDataset(std::move(yv), std::move(arm), std::move(stratum), std::move(x),
                        declared_arms, declared_strata, std::move(x_names));
}

void write_trial_csv(const std::string& path, const TrialDataset& d,
                     const std::string& meta_json) {
    std::string out;
    out.reserve(static_cast<std::size_t>(d.n()) * (d.dim() + 3) * 12);
    out += "y,arm,stratum";
    for (const auto& name : d.covariate_names()) {
        out += ',';
        out += name;
    }
    out += '\n';
    for (int i = 0; i < d.n(); ++i) {
        format_double(out, d.y()(i));
        out += ',';
        out += std::to_string(d.arm()[i]);
        out += ',';
        out += std::to_string(d.stratum()[i]);
        for (int j = 0; j < d.dim(); ++j) {
            out += ',';
            format_double(out, d.x()(i, j));
        }
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + path + "'");
    f << out;

    json sidecar;
    sidecar["A"] = d.num_arms();
    sidecar["K"] = d.num_strata();
    sidecar["covariates"] = d.covariate_names();
    if (!meta_json.empty()) sidecar["meta"] = json::parse(meta_json);
    std::ofstream sf(path + ".json", std::ios::binary);
    if (!sf) throw InputError("cannot write '" + path + ".json'");
    sf << sidecar.dump(2) << '\n';
}

}  // namespace carte
