#include "nfbo/objectives.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <numbers>

namespace nfbo {

namespace {

using std::numbers::pi;

double ackley(const Vector& x) {
    const double d = static_cast<double>(x.size());
    double rms = std::sqrt(x.squaredNorm() / d);
    double mc = (2.0 * pi * x.array()).cos().sum() / d;
    return -(-20.0 * std::exp(-0.2 * rms) - std::exp(mc) + 20.0 + std::numbers::e);
}

double rastrigin(const Vector& x) {
    const double d = static_cast<double>(x.size());
    double s = (x.array().square() - 10.0 * (2.0 * pi * x.array()).cos()).sum();
    return -(10.0 * d + s);
}

double levy(const Vector& x) {
    const int d = static_cast<int>(x.size());
    auto w = [&](int i) { return 1.0 + (x[i] - 1.0) / 4.0; };
    auto sq = [](double v) { return v * v; };
    double t = sq(std::sin(pi * w(0)));
    for (int i = 0; i < d - 1; ++i)
        t += sq(w(i) - 1.0) * (1.0 + 10.0 * sq(std::sin(pi * w(i) + 1.0)));
    t += sq(w(d - 1) - 1.0) * (1.0 + sq(std::sin(2.0 * pi * w(d - 1))));
    return -t;
}

double quadratic1d(const Vector& x) {
    double v = x[0] - 0.3;
    return -v * v;
}

std::atomic<bool> g_clip_warned{false};

}  // namespace

ObjectiveId objective_id_from_string(const std::string& name) {
    if (name == "ackley") return ObjectiveId::Ackley;
    if (name == "rastrigin") return ObjectiveId::Rastrigin;
    if (name == "levy") return ObjectiveId::Levy;
    if (name == "quadratic1d") return ObjectiveId::Quadratic1D;
    throw ConfigError("unknown objective: " + name);
}

std::string to_string(ObjectiveId id) {
    switch (id) {
        case ObjectiveId::Ackley: return "ackley";
        case ObjectiveId::Rastrigin: return "rastrigin";
        case ObjectiveId::Levy: return "levy";
        case ObjectiveId::Quadratic1D: return "quadratic1d";
    }
    throw ConfigError("unknown objective id");
}

SearchDomain domain_for(ObjectiveId id, int dim) {
    if (dim < 1) throw ConfigError("domain_for: dim must be >= 1");
    switch (id) {
        case ObjectiveId::Ackley: return SearchDomain::cube(dim, 32.768);
        case ObjectiveId::Rastrigin: return SearchDomain::cube(dim, 5.12);
        case ObjectiveId::Levy: return SearchDomain::cube(dim, 10.0);
        case ObjectiveId::Quadratic1D:
            return SearchDomain(Vector::Constant(1, 0.0), Vector::Constant(1, 1.0));
    }
    throw ConfigError("unknown objective id");
}

double eval_objective(ObjectiveId id, const Vector& x) {
    require_finite(x, "eval_objective");
    SearchDomain dom = domain_for(id, static_cast<int>(x.size()));
    Vector xe = x;
    if (!dom.contains(xe)) {
        if (!g_clip_warned.exchange(true))
            std::cerr << "warning: objective input outside the search box; clipping "
                         "(reported once)\n";
        xe = dom.clip(xe);
    }
    switch (id) {
        case ObjectiveId::Ackley: return ackley(xe);
        case ObjectiveId::Rastrigin: return rastrigin(xe);
        case ObjectiveId::Levy: return levy(xe);
        case ObjectiveId::Quadratic1D: return quadratic1d(xe);
    }
    throw ConfigError("unknown objective id");
}

BenchmarkFunction make_benchmark(ObjectiveId id, int dim) {
    SearchDomain dom = domain_for(id, dim);
    Vector x_star;
    switch (id) {
        case ObjectiveId::Ackley:
        case ObjectiveId::Rastrigin: x_star = Vector::Zero(dom.dim()); break;
        case ObjectiveId::Levy: x_star = Vector::Ones(dom.dim()); break;
        case ObjectiveId::Quadratic1D: x_star = Vector::Constant(1, 0.3); break;
    }
    return BenchmarkFunction{id, dom, 0.0, x_star};
}

struct ExternalProcessObjective::Impl {
    pid_t pid = -1;
    FILE* to_child = nullptr;
    FILE* from_child = nullptr;
    std::mutex mutex;
};

ExternalProcessObjective::ExternalProcessObjective(std::vector<std::string> argv)
    : impl_(new Impl) {
    if (argv.empty()) throw ConfigError("ExternalProcessObjective: empty command");
    int in_pipe[2], out_pipe[2];  // parent -> child, child -> parent
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
        throw Error("ExternalProcessObjective: pipe() failed");
    pid_t pid = fork();
    if (pid < 0) throw Error("ExternalProcessObjective: fork() failed");
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        std::vector<char*> args;
        for (auto& a : argv) args.push_back(a.data());
        args.push_back(nullptr);
        execvp(args[0], args.data());
        std::perror("execvp");
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    impl_->pid = pid;
    impl_->to_child = fdopen(in_pipe[1], "w");
    impl_->from_child = fdopen(out_pipe[0], "r");
    if (!impl_->to_child || !impl_->from_child)
        throw Error("ExternalProcessObjective: fdopen() failed");
}

ExternalProcessObjective::~ExternalProcessObjective() {
    if (impl_->to_child) fclose(impl_->to_child);
    if (impl_->from_child) fclose(impl_->from_child);
    if (impl_->pid > 0) waitpid(impl_->pid, nullptr, 0);
    delete impl_;
}

double ExternalProcessObjective::operator()(const Vector& x) {
    require_finite(x, "ExternalProcessObjective");
    std::lock_guard<std::mutex> lock(impl_->mutex);
    for (int i = 0; i < x.size(); ++i)
        std::fprintf(impl_->to_child, i ? " %.17g" : "%.17g", x[i]);
    std::fputc('\n', impl_->to_child);
    if (std::fflush(impl_->to_child) != 0)
        throw Error("ExternalProcessObjective: write to child failed");
    char line[256];
    if (!std::fgets(line, sizeof line, impl_->from_child))
        throw Error("ExternalProcessObjective: child exited mid-run");
    char* end = nullptr;
    double value = std::strtod(line, &end);
    if (end == line || !std::isfinite(value))
        throw Error("ExternalProcessObjective: unparseable response: " + std::string(line));
    return value;
}

}  // namespace nfbo
