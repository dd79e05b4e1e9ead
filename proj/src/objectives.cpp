#include "cpm/objectives.hpp"

#include <Eigen/QR>

#include <cmath>
#include <random>

namespace cpm {

OracleCounters OracleCounters::operator-(const OracleCounters& o) const
{
    return {value - o.value, gradient - o.gradient, hessian - o.hessian, matvec - o.matvec};
}

SmoothEval SmoothOracle::evaluate(const Vector& x, int order) const
{
    if (order < 0 || order > max_order()) {
        throw InvalidArgument("oracle order " + std::to_string(order) + " not supported");
    }
    require_same_dim(x.size(), dim(), "SmoothOracle::evaluate");
    count(order);
    return compute(x, order);
}

SmoothEval SmoothOracle::peek(const Vector& x, int order) const
{
    if (order < 0 || order > max_order()) {
        throw InvalidArgument("oracle order " + std::to_string(order) + " not supported");
    }
    require_same_dim(x.size(), dim(), "SmoothOracle::peek");
    return compute(x, order);
}

void SmoothOracle::count(int order) const
{
    switch (order) {
    case 0: n_value_.fetch_add(1, std::memory_order_relaxed); break;
    case 1: n_gradient_.fetch_add(1, std::memory_order_relaxed); break;
    default: n_hessian_.fetch_add(1, std::memory_order_relaxed); break;
    }
}

double SmoothOracle::lipschitz(int p) const
{
    auto it = lipschitz_.find(p);
    if (it == lipschitz_.end()) {
        throw InvalidArgument("Lipschitz constant of derivative order " + std::to_string(p) + " is not available");
    }
    return it->second;
}

bool SmoothOracle::has_lipschitz(int p) const
{
    return lipschitz_.count(p) != 0;
}

void SmoothOracle::set_lipschitz(int p, double value)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw InvalidArgument("Lipschitz constant must be positive and finite");
    }
    lipschitz_[p] = value;
}

OracleCounters SmoothOracle::counters() const
{
    return {n_value_.load(), n_gradient_.load(), n_hessian_.load(), n_matvec_.load()};
}

QuadraticOracle::QuadraticOracle(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b))
{
    if (a_.rows() != a_.cols()) {
        throw InvalidArgument("quadratic matrix must be square");
    }
    require_same_dim(a_.rows(), b_.size(), "QuadraticOracle");
}

SmoothEval QuadraticOracle::compute(const Vector& x, int order) const
{
    SmoothEval e;
    const Vector ax = a_ * x;
    e.value = 0.5 * ax.dot(x) - b_.dot(x);
    if (order >= 1) {
        e.gradient = ax - b_;
    }
    if (order >= 2) {
        e.hessian = a_;
    }
    return e;
}

void QuadraticOracle::count(int) const
{
    n_matvec_.fetch_add(1, std::memory_order_relaxed);
}

LogSumExpOracle::LogSumExpOracle(Matrix a, Vector b, double mu) : a_(std::move(a)), b_(std::move(b)), mu_(mu)
{
    if (!(mu_ > 0.0)) {
        throw InvalidArgument("log-sum-exp smoothing mu must be positive");
    }
    require_same_dim(a_.rows(), b_.size(), "LogSumExpOracle");
}

SmoothEval LogSumExpOracle::compute(const Vector& x, int order) const
{
    SmoothEval e;
    const Vector u = (a_ * x - b_) / mu_;
    const double shift = u.maxCoeff();
    const Vector w = (u.array() - shift).exp().matrix();
    const double total = w.sum();
    e.value = mu_ * (shift + std::log(total));
    if (order >= 1) {
        const Vector pi = w / total;
        e.gradient = a_.transpose() * pi;
        if (order >= 2) {
            const Matrix weighted = a_.array().colwise() * pi.array().sqrt();
            e.hessian = (weighted.transpose() * weighted - e.gradient * e.gradient.transpose()) / mu_;
            e.hessian = 0.5 * (e.hessian + e.hessian.transpose());
        }
    }
    return e;
}

PowerRegularizer::PowerRegularizer(double sigma, std::shared_ptr<const PowerProx> d) : sigma_(sigma), d_(std::move(d))
{
    if (!(sigma_ > 0.0)) {
        throw InvalidArgument("regularizer weight sigma must be positive");
    }
    if (!d_) {
        throw InvalidArgument("regularizer needs a prox function");
    }
}

double PowerRegularizer::value(const Vector& x) const
{
    return sigma_ * d_->value(x);
}

Vector PowerRegularizer::subgradient(const Vector& x) const
{
    return sigma_ * d_->gradient(x);
}

Matrix PowerRegularizer::hessian(const Vector& x) const
{
    return sigma_ * d_->hessian(x);
}

double PowerRegularizer::modulus(const ProxFunction& d) const
{
    const auto* other = dynamic_cast<const PowerProx*>(&d);
    if (other == nullptr) {
        return 0.0;
    }
    const bool same = other->order() == d_->order() && other->center() == d_->center() &&
                      other->metric().matrix() == d_->metric().matrix();
    return same ? sigma_ : 0.0;
}

Json PowerRegularizer::describe() const
{
    return Json{{"kind", "power"}, {"sigma", sigma_}, {"p", d_->order()}};
}

std::shared_ptr<const PowerRegularizer> power_regularizer_component(double sigma, std::shared_ptr<const PowerProx> d)
{
    return std::make_shared<const PowerRegularizer>(sigma, std::move(d));
}

double CompositeObjective::value(const Vector& x) const
{
    return smooth->evaluate(x, 0).value + simple->value(x);
}

double CompositeObjective::peek_value(const Vector& x) const
{
    return smooth->peek(x, 0).value + simple->value(x);
}

Vector sigmoid_spectrum(int n, double alpha)
{
    if (n < 2) {
        throw InvalidArgument("sigmoid spectrum needs n >= 2");
    }
    if (!(alpha > 0.0)) {
        throw InvalidArgument("sigmoid spectrum needs alpha > 0");
    }
    Vector lambda(n);
    for (int i = 1; i <= n; ++i) {
        lambda[i - 1] = 1.0 / (1.0 + std::exp(alpha * (n + 1 - 2 * i) / (n - 1)));
    }
    return lambda;
}

double alpha_for_condition(double q)
{
    if (!(q > 0.0 && q < 1.0)) {
        throw InvalidArgument("condition ratio q must lie in (0, 1)");
    }
    // lambda_1 / lambda_n = (1 + e^{-alpha}) / (1 + e^{alpha}) = e^{-alpha}.
    return -std::log(q);
}

namespace {

Matrix random_orthogonal(int n, std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            g(i, j) = gauss(rng);
        }
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        if (r(j, j) < 0.0) {
            q.col(j) = -q.col(j);
        }
    }
    return q;
}

Vector uniform_vector(Eigen::Index n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v[i] = unif(rng);
    }
    return v;
}

}  // namespace

CompositeObjective quadratic_instance(int n, double alpha, std::uint64_t seed, bool unit_solution)
{
    const Vector lambda = sigmoid_spectrum(n, alpha);
    std::mt19937_64 rng(seed);
    const Matrix q = random_orthogonal(n, rng);
    Matrix a = q * lambda.asDiagonal() * q.transpose();
    a = 0.5 * (a + a.transpose());
    Vector b = uniform_vector(n, rng);
    if (unit_solution) {
        b /= a.ldlt().solve(b).norm();
    }

    CompositeObjective obj;
    auto oracle = std::make_shared<QuadraticOracle>(std::move(a), std::move(b));
    oracle->set_lipschitz(1, lambda.maxCoeff());
    obj.smooth = oracle;
    obj.simple = std::make_shared<const ZeroComponent>(n);
    obj.metric = std::make_shared<const MetricOperator>(MetricOperator::identity(n));
    obj.x0 = Vector::Zero(n);
    obj.descriptor = Json{{"kind", "quadratic"},
                          {"n", n},
                          {"alpha", alpha},
                          {"q", std::exp(-alpha)},
                          {"seed", seed},
                          {"lambda_min", lambda.minCoeff()},
                          {"lambda_max", lambda.maxCoeff()},
                          {"L1", lambda.maxCoeff()},
                          {"metric", "identity"},
                          {"x0", "zero"},
                          {"generator", "Q from QR of seeded Gaussian, b uniform[-1,1], mt19937_64"},
                          {"b_scaling", unit_solution ? "unit_solution" : "raw"},
                          {"regularizer", Json{{"kind", "zero"}}}};
    return obj;
}

CompositeObjective lse_instance(int n, double mu, std::uint64_t seed)
{
    if (n < 1) {
        throw InvalidArgument("log-sum-exp instance needs n >= 1");
    }
    if (!(mu > 0.0)) {
        throw InvalidArgument("log-sum-exp instance needs mu > 0");
    }
    const int m = 6 * n;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Matrix a(m, n);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            a(i, j) = unif(rng);
        }
    }
    Vector b = uniform_vector(m, rng);

    Matrix bmat = a.transpose() * a;
    bmat = 0.5 * (bmat + bmat.transpose());
    bool regularized = false;
    MetricPtr metric;
    try {
        metric = std::make_shared<const MetricOperator>(bmat);
    } catch (const InvalidArgument&) {
        regularized = true;
        bmat += 1e-10 * Matrix::Identity(n, n);
        try {
            metric = std::make_shared<const MetricOperator>(bmat);
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(std::string("degenerate log-sum-exp metric: ") + e.what());
        }
    }

    CompositeObjective obj;
    auto oracle = std::make_shared<LogSumExpOracle>(std::move(a), std::move(b), mu);
    oracle->set_lipschitz(1, 1.0 / mu);
    oracle->set_lipschitz(2, 1.0);
    obj.smooth = oracle;
    obj.simple = std::make_shared<const ZeroComponent>(n);
    obj.metric = std::move(metric);
    obj.x0 = Vector::Zero(n);
    obj.descriptor = Json{{"kind", "lse"},
                          {"n", n},
                          {"m", m},
                          {"mu", mu},
                          {"seed", seed},
                          {"L1", 1.0 / mu},
                          {"L2", 1.0},
                          {"metric", regularized ? "sum a_i a_i^T + 1e-10 I" : "sum a_i a_i^T"},
                          {"x0", "zero"},
                          {"generator", "a_i and b uniform[-1,1], mt19937_64"},
                          {"regularizer", Json{{"kind", "zero"}}}};
    return obj;
}

void attach_power_regularizer(CompositeObjective& obj, double sigma, int p)
{
    auto d = std::make_shared<const PowerProx>(p, obj.x0, obj.metric);
    obj.simple = power_regularizer_component(sigma, std::move(d));
    obj.descriptor["regularizer"] = obj.simple->describe();
    obj.f_star.reset();
    obj.x_star.reset();
    obj.descriptor.erase("f_star");
}

CompositeObjective instance_from_descriptor(const Json& descriptor)
{
    const std::string kind = descriptor.at("kind").get<std::string>();
    const int n = descriptor.at("n").get<int>();
    const auto seed = descriptor.at("seed").get<std::uint64_t>();
    CompositeObjective obj;
    if (kind == "quadratic") {
        obj = quadratic_instance(n, descriptor.at("alpha").get<double>(), seed,
                                 descriptor.value("b_scaling", "unit_solution") != "raw");
    } else if (kind == "lse") {
        obj = lse_instance(n, descriptor.at("mu").get<double>(), seed);
        if (descriptor.contains("L2")) {
            obj.smooth->set_lipschitz(2, descriptor.at("L2").get<double>());
            obj.descriptor["L2"] = descriptor.at("L2");
        }
    } else {
        throw InvalidArgument("unknown instance kind '" + kind + "'");
    }
    if (descriptor.contains("L1")) {
        obj.smooth->set_lipschitz(1, descriptor.at("L1").get<double>());
        obj.descriptor["L1"] = descriptor.at("L1");
    }
    if (descriptor.contains("regularizer")) {
        const auto& reg = descriptor.at("regularizer");
        if (reg.value("kind", "zero") == "power") {
            attach_power_regularizer(obj, reg.at("sigma").get<double>(), reg.at("p").get<int>());
        }
    }
    if (descriptor.contains("f_star")) {
        attach_reference_optimum(obj, descriptor.value("f_star_tol", 1e-12));
    }
    return obj;
}

ReferenceOptimum reference_optimum(const CompositeObjective& obj, double tol)
{
    if (!(tol > 0.0)) {
        throw InvalidArgument("reference tolerance must be positive");
    }
    const auto* quad = dynamic_cast<const QuadraticOracle*>(obj.smooth.get());
    if (quad != nullptr && obj.simple->is_zero()) {
        Eigen::LDLT<Matrix> ldlt(quad->matrix());
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
            Vector x = ldlt.solve(quad->linear());
            // One step of iterative refinement.
            x += ldlt.solve(quad->linear() - quad->matrix() * x);
            return {x, -0.5 * quad->linear().dot(x)};
        }
    }
    if (obj.smooth->max_order() < 2) {
        throw InvalidArgument("reference optimum needs a second-order oracle");
    }
    const SmoothFunction fn = [&obj](const Vector& x, int order) {
        SmoothEval e = obj.smooth->peek(x, order);
        e.value += obj.simple->value(x);
        if (order >= 1) {
            e.gradient += obj.simple->subgradient(x);
        }
        if (order >= 2) {
            e.hessian += obj.simple->hessian(x);
        }
        return e;
    };
    NewtonOptions opts;
    opts.tolerance = tol;
    opts.max_iterations = 500;
    const NewtonResult res = newton_minimize(fn, obj.x0, *obj.metric, opts);
    if (!res.converged) {
        throw SolverError("reference optimum did not converge: gradient norm " + std::to_string(res.gradient_norm) +
                          " after " + std::to_string(res.iterations) + " Newton steps");
    }
    return {res.x, res.value};
}

void attach_reference_optimum(CompositeObjective& obj, double tol)
{
    ReferenceOptimum ref = reference_optimum(obj, tol);
    obj.f_star = ref.value;
    obj.x_star = std::move(ref.x);
    obj.descriptor["f_star"] = ref.value;
    obj.descriptor["f_star_tol"] = tol;
}

}  // namespace cpm
