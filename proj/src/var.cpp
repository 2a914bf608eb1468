#include "dsde/var.hpp"

#include <cmath>
#include <cstring>

#include "json.hpp"

namespace dsde {
namespace {

// dense symmetric solve via Gaussian elimination with partial pivoting
std::vector<double> solve_normal_equations(std::vector<double> A, std::vector<double> rhs,
                                           std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[pivot * n + col])) pivot = r;
        if (std::abs(A[pivot * n + col]) < 1e-12)
            throw SingularDesign("regression design matrix is singular");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(A[col * n + c], A[pivot * n + c]);
            std::swap(rhs[col], rhs[pivot]);
        }
        const double inv = 1.0 / A[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = A[r * n + col] * inv;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = rhs[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= A[ri * n + c] * x[c];
        x[ri] = acc / A[ri * n + ri];
    }
    return x;
}

}  // namespace

VarFit fit_var(const std::vector<std::vector<double>>& segments, int dim, int order) {
    if (dim <= 0 || order <= 0) throw ConfigError("fit_var needs dim >= 1 and order >= 1");
    const std::size_t n_reg = 1 + static_cast<std::size_t>(dim) * order;

    // gather regression rows: regressors [1, x_{t-1}, ..., x_{t-p}], target x_t
    std::vector<std::vector<double>> X;  // rows x n_reg
    std::vector<std::vector<double>> Y;  // rows x dim
    std::vector<long> steps;
    for (const auto& seg : segments) {
        if (seg.size() % dim != 0) throw DimensionMismatch("segment length not divisible by dim");
        const long len = static_cast<long>(seg.size()) / dim;
        for (long t = order; t < len; ++t) {
            std::vector<double> row(n_reg);
            row[0] = 1.0;
            for (int lag = 1; lag <= order; ++lag)
                for (int c = 0; c < dim; ++c)
                    row[1 + static_cast<std::size_t>(lag - 1) * dim + c] =
                        seg[static_cast<std::size_t>(t - lag) * dim + c];
            X.push_back(std::move(row));
            Y.emplace_back(seg.begin() + t * dim, seg.begin() + (t + 1) * dim);
            steps.push_back(t + 1);  // series index 1..len maps step t to t+1
        }
    }
    const std::size_t rows = X.size();
    if (rows <= n_reg) throw SingularDesign("not enough rows for VAR(" + std::to_string(order) + ")");

    std::vector<double> xtx(n_reg * n_reg, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < n_reg; ++i)
            for (std::size_t j = 0; j < n_reg; ++j) xtx[i * n_reg + j] += X[r][i] * X[r][j];

    VarFit fit;
    fit.model.dim = dim;
    fit.model.order = order;
    fit.model.intercept.assign(dim, 0.0);
    fit.model.coef.assign(static_cast<std::size_t>(order) * dim * dim, 0.0);
    fit.residuals.assign(rows * static_cast<std::size_t>(dim), 0.0);
    fit.target_step = std::move(steps);

    for (int eq = 0; eq < dim; ++eq) {
        std::vector<double> xty(n_reg, 0.0);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t i = 0; i < n_reg; ++i) xty[i] += X[r][i] * Y[r][eq];
        const auto beta = solve_normal_equations(xtx, xty, n_reg);
        fit.model.intercept[eq] = beta[0];
        for (int lag = 1; lag <= order; ++lag)
            for (int c = 0; c < dim; ++c)
                fit.model.coef[(static_cast<std::size_t>(lag - 1) * dim + eq) * dim + c] =
                    beta[1 + static_cast<std::size_t>(lag - 1) * dim + c];
        for (std::size_t r = 0; r < rows; ++r) {
            double pred = 0.0;
            for (std::size_t i = 0; i < n_reg; ++i) pred += X[r][i] * beta[i];
            fit.residuals[r * dim + eq] = pred - Y[r][eq];
        }
    }
    return fit;
}

VarPrediction var_predict(const VarModel& model, std::span<const double> history,
                          long k_current, int steps) {
    const int d = model.dim, p = model.order;
    if (history.size() % d != 0 || static_cast<int>(history.size() / d) < p)
        throw InsufficientHistory("VAR prediction needs " + std::to_string(p) +
                                  " history points");
    // ring of the p most recent values, newest last
    std::vector<double> ring(history.end() - static_cast<std::size_t>(p) * d, history.end());
    VarPrediction out;
    std::vector<double> acc_var(d, 0.0);
    for (int i = 1; i <= steps; ++i) {
        std::vector<double> next(model.intercept);
        for (int lag = 1; lag <= p; ++lag)
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c)
                    next[r] += model.coefficient(lag, r, c) *
                               ring[static_cast<std::size_t>(p - lag) * d + c];
        std::memmove(ring.data(), ring.data() + d,
                     sizeof(double) * static_cast<std::size_t>(p - 1) * d);
        std::copy(next.begin(), next.end(), ring.begin() + static_cast<std::size_t>(p - 1) * d);
        for (int j = 0; j < d; ++j) {
            if (!model.var_a.empty())
                acc_var[j] += std::exp(model.var_a[j] +
                                       model.var_b[j] * static_cast<double>(
                                                            day_of_year(k_current + i)));
            out.mean.push_back(next[j]);
            out.variance.push_back(acc_var[j]);
        }
    }
    return out;
}

ExpVarianceFit fit_exp_variance(std::span<const double> residuals,
                                std::span<const long> day_index) {
    if (residuals.empty() || residuals.size() != day_index.size())
        throw LengthMismatch("residuals and day indices must align and be nonempty");
    // average squared residuals per day first
    std::vector<double> sum(366, 0.0);
    std::vector<long> count(366, 0);
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        const long x = day_index[i];
        if (x < 1 || x > 365) throw ConfigError("day index out of range 1..365");
        sum[x] += residuals[i] * residuals[i];
        ++count[x];
    }
    ExpVarianceFit fit;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    long n = 0;
    for (long x = 1; x <= 365; ++x) {
        if (count[x] == 0) continue;
        double y = sum[x] / static_cast<double>(count[x]);
        if (y <= 0.0) {
            y = 1e-12;
            fit.clamped = true;
        }
        const double ly = std::log(y);
        sx += x;
        sy += ly;
        sxx += static_cast<double>(x) * x;
        sxy += x * ly;
        ++n;
    }
    if (n < 2) throw SingularDesign("need residuals on at least two distinct days");
    const double denom = n * sxx - sx * sx;
    fit.b = (n * sxy - sx * sy) / denom;
    fit.a = (sy - fit.b * sx) / n;
    return fit;
}

std::string VarModel::to_json() const {
    nlohmann::json j;
    j["dim"] = dim;
    j["order"] = order;
    j["intercept"] = intercept;
    auto lags = nlohmann::json::array();
    for (int lag = 1; lag <= order; ++lag) {
        auto matrix = nlohmann::json::array();
        for (int r = 0; r < dim; ++r) {
            std::vector<double> row(dim);
            for (int c = 0; c < dim; ++c) row[c] = coefficient(lag, r, c);
            matrix.push_back(row);
        }
        lags.push_back(std::move(matrix));
    }
    j["coefficients"] = std::move(lags);
    j["variance"] = {{"a", var_a}, {"b", var_b}};
    return j.dump(2);
}

VarModel VarModel::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    VarModel m;
    m.dim = j.at("dim").get<int>();
    m.order = j.at("order").get<int>();
    m.intercept = j.at("intercept").get<std::vector<double>>();
    m.coef.assign(static_cast<std::size_t>(m.order) * m.dim * m.dim, 0.0);
    const auto& lags = j.at("coefficients");
    for (int lag = 1; lag <= m.order; ++lag)
        for (int r = 0; r < m.dim; ++r)
            for (int c = 0; c < m.dim; ++c)
                m.coef[(static_cast<std::size_t>(lag - 1) * m.dim + r) * m.dim + c] =
                    lags.at(lag - 1).at(r).at(c).get<double>();
    if (j.contains("variance")) {
        m.var_a = j.at("variance").at("a").get<std::vector<double>>();
        m.var_b = j.at("variance").at("b").get<std::vector<double>>();
    }
    return m;
}

}  // namespace dsde
