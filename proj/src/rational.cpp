#include "antw/rational.hpp"

#include <json.hpp>

namespace antw {

int Polynomial::degree() const {
    Polynomial t = trimmed();
    return t.coeffs.empty() ? -1 : static_cast<int>(t.coeffs.size()) - 1;
}

std::complex<double> Polynomial::eval(std::complex<double> s) const {
    std::complex<double> v = 0.0;
    for (double c : coeffs) v = v * s + c;
    return v;
}

Polynomial Polynomial::trimmed() const {
    double scale = 0.0;
    for (double c : coeffs) scale = std::max(scale, std::abs(c));
    std::size_t k = 0;
    while (k < coeffs.size() && std::abs(coeffs[k]) <= 1e-14 * scale) ++k;
    return Polynomial(std::vector<double>(coeffs.begin() + k, coeffs.end()));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.coeffs.empty() || b.coeffs.empty()) return Polynomial{};
    std::vector<double> out(a.coeffs.size() + b.coeffs.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs.size(); ++j) out[i + j] += a.coeffs[i] * b.coeffs[j];
    return Polynomial(out);
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> out(std::max(a.coeffs.size(), b.coeffs.size()), 0.0);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        out[out.size() - a.coeffs.size() + i] += a.coeffs[i];
    for (std::size_t i = 0; i < b.coeffs.size(); ++i)
        out[out.size() - b.coeffs.size() + i] += b.coeffs[i];
    return Polynomial(out);
}

Polynomial operator*(double c, const Polynomial& a) {
    Polynomial out = a;
    for (double& v : out.coeffs) v *= c;
    return out;
}

RationalTransfer RationalTransfer::siso(Polynomial n, Polynomial d) {
    RationalTransfer t;
    t.rows = t.cols = 1;
    t.num = {std::move(n)};
    t.den = {std::move(d)};
    return t;
}

RationalTransfer RationalTransfer::constant(double c) {
    return siso(Polynomial{c}, Polynomial{1.0});
}

bool RationalTransfer::entry_proper(int i, int j) const {
    return num_at(i, j).degree() <= den_at(i, j).degree();
}

CMat RationalTransfer::eval(std::complex<double> s) const {
    CMat M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) M(i, j) = num_at(i, j).eval(s) / den_at(i, j).eval(s);
    return M;
}

StateSpaceModel to_state_space(const RationalTransfer& t) {
    if (t.rows <= 0 || t.cols <= 0) throw DimensionError("to_state_space: empty transfer");
    // per-column denominators/numerators, normalized monic
    int total_states = 0;
    std::vector<Polynomial> col_den(t.cols);
    std::vector<std::vector<Polynomial>> eff_num(t.rows, std::vector<Polynomial>(t.cols));
    for (int j = 0; j < t.cols; ++j) {
        Polynomial d{1.0};
        for (int i = 0; i < t.rows; ++i) {
            Polynomial dij = t.den_at(i, j).trimmed();
            if (dij.coeffs.empty())
                throw Error("to_state_space: zero denominator");
            if (!t.entry_proper(i, j))
                throw Error("to_state_space: improper entry (" + std::to_string(i) + "," +
                            std::to_string(j) + ")");
            d = d * dij;
        }
        double lead = d.coeffs.front();
        d = (1.0 / lead) * d;
        col_den[j] = d;
        for (int i = 0; i < t.rows; ++i) {
            Polynomial others{1.0 / lead};
            for (int k = 0; k < t.rows; ++k)
                if (k != i) others = others * t.den_at(k, j).trimmed();
            eff_num[i][j] = (t.num_at(i, j).trimmed() * others).trimmed();
        }
        total_states += std::max(0, col_den[j].degree());
    }

    Mat A = Mat::Zero(total_states, total_states);
    Mat B = Mat::Zero(total_states, t.cols);
    Mat C = Mat::Zero(t.rows, total_states);
    Mat D = Mat::Zero(t.rows, t.cols);

    int off = 0;
    for (int j = 0; j < t.cols; ++j) {
        const int k = std::max(0, col_den[j].degree());
        const auto& d = col_den[j].coeffs;  // monic, size k+1
        if (k > 0) {
            for (int c = 0; c < k; ++c) A(off, off + c) = -d[c + 1];
            for (int r = 1; r < k; ++r) A(off + r, off + r - 1) = 1.0;
            B(off, j) = 1.0;
        }
        for (int i = 0; i < t.rows; ++i) {
            Polynomial n = eff_num[i][j];
            double feed = 0.0;
            if (n.degree() == k && k >= 0) {
                feed = n.coeffs.front();  // monic denominator
                n = (n + (-feed) * col_den[j]).trimmed();
            } else if (k == 0) {
                feed = n.coeffs.empty() ? 0.0 : n.coeffs.front();
                n = Polynomial{};
            }
            D(i, j) = feed;
            // remainder degree < k; coefficient of s^{k-1-l} drives state l+1
            int nd = n.degree();
            for (int p = 0; p <= nd; ++p) {
                int power = nd - p;
                C(i, off + (k - 1 - power)) = n.coeffs[p];
            }
        }
        off += k;
    }
    return StateSpaceModel::make(A, B, C, D);
}

namespace {
nlohmann::json poly_to_json(const Polynomial& p) { return nlohmann::json(p.coeffs); }
Polynomial poly_from_json(const nlohmann::json& j) {
    return Polynomial(j.get<std::vector<double>>());
}
}  // namespace

std::string to_json_string(const RationalTransfer& t) {
    nlohmann::ordered_json j;
    j["rows"] = t.rows;
    j["cols"] = t.cols;
    nlohmann::json entries = nlohmann::json::array();
    for (int i = 0; i < t.rows; ++i)
        for (int c = 0; c < t.cols; ++c)
            entries.push_back({{"num", poly_to_json(t.num_at(i, c))},
                               {"den", poly_to_json(t.den_at(i, c))}});
    j["entries"] = entries;
    return j.dump(2);
}

RationalTransfer rational_from_json_string(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    RationalTransfer t;
    t.rows = j.at("rows").get<int>();
    t.cols = j.at("cols").get<int>();
    for (const auto& e : j.at("entries")) {
        t.num.push_back(poly_from_json(e.at("num")));
        t.den.push_back(poly_from_json(e.at("den")));
    }
    if (static_cast<int>(t.num.size()) != t.rows * t.cols)
        throw Error("rational json: entry count mismatch");
    return t;
}

}  // namespace antw
