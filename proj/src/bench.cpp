#include "aa/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "aa/solve.hpp"

namespace aa {

namespace fs = std::filesystem;
using nlohmann::json;

void RunSpec::validate() const {
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (methods.empty()) throw std::invalid_argument("at least one method is required");
  for (const auto& [key, value] : sizes) {
    if (!(value > 0.0)) throw std::invalid_argument("size '" + key + "' must be positive");
  }
  if (!csv_path.empty() && family != Family::gd_logreg) {
    throw std::invalid_argument("a CSV dataset only applies to gd_logreg");
  }
}

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw std::invalid_argument(std::string(where) + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) {
      throw std::invalid_argument(std::string("unknown key '") + key + "' in " + where);
    }
  }
}

}  // namespace

RunSpec run_spec_from_json(const json& j) {
  RunSpec spec;
  try {
    check_keys(j, {"family", "sizes", "methods", "repeats", "csv", "config"}, "spec");
    if (j.contains("family")) spec.family = parse_family(j.at("family").get<std::string>());
    if (j.contains("sizes")) {
      for (const auto& [key, value] : j.at("sizes").items()) {
        spec.sizes[key] = value.get<double>();
      }
    }
    if (j.contains("methods")) {
      spec.methods.clear();
      for (const auto& m : j.at("methods")) spec.methods.push_back(parse_method(m.get<std::string>()));
    }
    read_if(j, "repeats", spec.repeats);
    read_if(j, "csv", spec.csv_path);
    if (j.contains("config")) {
      const json& c = j.at("config");
      check_keys(c,
                 {"theta_bar", "tau", "safeguard_d", "safeguard_eps", "alpha", "km_alpha",
                  "memory", "k_max", "tol", "seed", "debug_invariants", "record_timing"},
                 "config");
      SolveConfig& cfg = spec.config;
      read_if(c, "theta_bar", cfg.theta_bar);
      read_if(c, "tau", cfg.tau);
      read_if(c, "safeguard_d", cfg.safeguard_d);
      read_if(c, "safeguard_eps", cfg.safeguard_eps);
      read_if(c, "alpha", cfg.alpha);
      read_if(c, "km_alpha", cfg.km_alpha);
      read_if(c, "memory", cfg.memory);
      read_if(c, "k_max", cfg.k_max);
      read_if(c, "tol", cfg.tol);
      read_if(c, "seed", cfg.seed);
      read_if(c, "debug_invariants", cfg.debug_invariants);
      read_if(c, "record_timing", cfg.record_timing);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad spec: ") + e.what());
  }
  return spec;
}

json to_json(const RunSpec& spec) {
  json methods = json::array();
  for (Method m : spec.methods) methods.push_back(std::string(to_string(m)));
  FamilyParams sizes = default_params(spec.family);
  for (const auto& [k, v] : spec.sizes) sizes[k] = v;
  const SolveConfig& c = spec.config;
  json j = {
      {"family", std::string(to_string(spec.family))},
      {"sizes", sizes},
      {"methods", methods},
      {"repeats", spec.repeats},
      {"config",
       {{"theta_bar", c.theta_bar},
        {"tau", c.tau},
        {"safeguard_d", c.safeguard_d},
        {"safeguard_eps", c.safeguard_eps},
        {"alpha", c.alpha},
        {"km_alpha", c.km_alpha},
        {"memory", c.memory},
        {"k_max", c.k_max},
        {"tol", c.tol},
        {"seed", c.seed},
        {"debug_invariants", c.debug_invariants},
        {"record_timing", c.record_timing}}},
  };
  if (!spec.csv_path.empty()) j["csv"] = spec.csv_path;
  return j;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_trace_csv(std::ostream& out, Method method, const SolveResult& result) {
  out << "k,method,step_type,residual_l2,relative_residual,f_evals_cum,elapsed_s\n";
  const std::string name(to_string(method));
  for (const auto& r : result.trace) {
    out << r.k << ',' << name << ',' << to_string(r.step_type) << ',' << num(r.residual_l2)
        << ',' << num(r.relative_residual) << ',' << r.f_evals_cum << ',' << num(r.elapsed_s)
        << '\n';
  }
}

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

/// Finite doubles as numbers, the rest as strings ("inf", "nan").
json number_json(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

json to_json(const MethodSummary& s) {
  return {
      {"method", std::string(to_string(s.method))},
      {"memory", s.memory},
      {"converged", s.converged},
      {"status", s.status},
      {"iterations_to_tol", s.iterations_to_tol ? json(*s.iterations_to_tol) : json(nullptr)},
      {"iterations", s.iterations},
      {"final_residual", number_json(s.final_residual)},
      {"final_relative_residual", number_json(s.final_relative_residual)},
      {"f_evals", s.f_evals},
      {"wall_time_s", s.wall_time_s},
      {"time_ratio", optional_json(s.time_ratio)},
      {"aa_steps", s.aa_steps},
      {"restarts", s.restarts},
      {"fallbacks", s.fallbacks},
      {"trace", s.trace_file},
  };
}

json to_json(const InstanceSummary& inst) {
  json runs = json::array();
  for (const auto& r : inst.runs) runs.push_back(to_json(r));
  return {{"index", inst.index}, {"seed", inst.seed}, {"directory", inst.directory},
          {"runs", runs}};
}

struct Task {
  int instance = 0;
  std::size_t slot = 0;
  Method method = Method::km;
  SolveConfig config;
  std::string file;
};

struct Instance {
  GeneratedProblem problem;
  fs::path dir;
};

std::vector<Instance> make_instances(const RunSpec& spec, const fs::path& out_dir) {
  std::vector<Instance> out;
  for (int i = 0; i < spec.repeats; ++i) {
    SeededRng rng(spec.config.seed + static_cast<std::uint64_t>(i));
    char name[32];
    std::snprintf(name, sizeof name, "instance_%03d", i);
    out.push_back({generate(spec.family, rng, spec.sizes, spec.csv_path), out_dir / name});
    fs::create_directories(out.back().dir);
  }
  return out;
}

MethodSummary summarize(Method method, const SolveConfig& config, const SolveResult& res,
                        double wall, const std::string& file) {
  MethodSummary s;
  s.method = method;
  s.memory = config.memory;
  s.converged = res.converged;
  s.status = std::string(to_string(res.status));
  for (const auto& r : res.trace) {
    if (r.relative_residual <= config.tol) {
      s.iterations_to_tol = r.k;
      break;
    }
  }
  s.iterations = res.iterations();
  s.final_relative_residual = res.final_relative_residual();
  s.final_residual = res.trace.empty() ? 0.0 : res.trace.back().residual_l2;
  if (res.status == SolveStatus::non_finite) s.final_residual = s.final_relative_residual;
  s.f_evals = res.f_evals();
  s.wall_time_s = config.record_timing ? wall : 0.0;
  s.aa_steps = res.aa_steps;
  s.restarts = res.restarts;
  s.fallbacks = res.fallbacks;
  s.trace_file = file;
  return s;
}

/// Runs the tasks over `jobs` threads; results land in summaries[instance][slot].
void execute(const std::vector<Instance>& instances, const std::vector<Task>& tasks,
             std::vector<InstanceSummary>& summaries, int jobs) {
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      const Task& task = tasks[t];
      try {
        const Instance& inst = instances[task.instance];
        const auto start = std::chrono::steady_clock::now();
        const SolveResult res =
            run(inst.problem.problem, inst.problem.x0, task.config, task.method);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::ofstream out(inst.dir / task.file);
        if (!out) throw std::runtime_error("cannot write " + (inst.dir / task.file).string());
        write_trace_csv(out, task.method, res);
        summaries[task.instance].runs[task.slot] =
            summarize(task.method, task.config, res, wall, task.file);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

std::vector<InstanceSummary> empty_summaries(const std::vector<Instance>& instances,
                                             const RunSpec& spec, std::size_t runs) {
  std::vector<InstanceSummary> out;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    out.push_back({static_cast<int>(i), spec.config.seed + i,
                   instances[i].dir.filename().string(), std::vector<MethodSummary>(runs)});
  }
  return out;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void fill_time_ratios(std::vector<InstanceSummary>& instances) {
  for (auto& inst : instances) {
    const MethodSummary* km = nullptr;
    for (const auto& r : inst.runs) {
      if (r.method == Method::km) km = &r;
    }
    if (!km || km->iterations == 0 || km->wall_time_s <= 0.0) continue;
    const double base = km->wall_time_s / km->iterations;
    for (auto& r : inst.runs) {
      if (r.iterations > 0 && r.wall_time_s > 0.0) {
        r.time_ratio = (r.wall_time_s / r.iterations) / base;
      }
    }
  }
}

void validate_config(const RunSpec& spec, const std::vector<Instance>& instances) {
  for (Method m : spec.methods) {
    spec.config.validate(instances.front().problem.problem.regime, m);
  }
}

}  // namespace

json to_json(const RunSummary& summary) {
  json instances = json::array();
  for (const auto& inst : summary.instances) instances.push_back(to_json(inst));
  return {{"spec", to_json(summary.spec)}, {"instances", instances}};
}

RunSummary cmd_run(const RunSpec& spec, const fs::path& out_dir, int jobs) {
  spec.validate();
  fs::create_directories(out_dir);
  const auto instances = make_instances(spec, out_dir);
  validate_config(spec, instances);
  std::vector<Task> tasks;
  for (int i = 0; i < spec.repeats; ++i) {
    for (std::size_t j = 0; j < spec.methods.size(); ++j) {
      tasks.push_back({i, j, spec.methods[j], spec.config,
                       std::string(to_string(spec.methods[j])) + ".csv"});
    }
  }
  RunSummary summary{spec, empty_summaries(instances, spec, spec.methods.size())};
  execute(instances, tasks, summary.instances, jobs);
  fill_time_ratios(summary.instances);
  write_json(out_dir / "summary.json", to_json(summary));
  return summary;
}

json to_json(const MemorySweepSummary& summary) {
  json instances = json::array();
  for (const auto& inst : summary.instances) instances.push_back(to_json(inst));
  json table = json::object();
  for (int m : summary.memories) {
    json row = json::object();
    for (Method method : {Method::aa1s, Method::aa1}) {
      json iters = json::array();
      int converged = 0;
      for (const auto& inst : summary.instances) {
        for (const auto& r : inst.runs) {
          if (r.memory != m || r.method != method) continue;
          iters.push_back(r.iterations_to_tol ? json(*r.iterations_to_tol) : json(nullptr));
          converged += r.converged;
        }
      }
      row[std::string(to_string(method))] = {{"iterations_to_tol", iters},
                                             {"converged", converged}};
    }
    table[std::to_string(m)] = row;
  }
  return {{"spec", to_json(summary.spec)}, {"memories", table}, {"instances", instances}};
}

MemorySweepSummary cmd_sweep_memory(const RunSpec& spec, const std::vector<int>& memories,
                                    const fs::path& out_dir, int jobs) {
  spec.validate();
  if (memories.empty()) throw std::invalid_argument("at least one memory is required");
  for (int m : memories) {
    if (m < 1) throw std::invalid_argument("memories must be positive");
  }
  if (std::set<int>(memories.begin(), memories.end()).size() != memories.size()) {
    throw std::invalid_argument("memories must be distinct");
  }
  fs::create_directories(out_dir);
  RunSpec sweep = spec;
  sweep.methods = {Method::aa1s, Method::aa1};
  const auto instances = make_instances(sweep, out_dir);
  validate_config(sweep, instances);
  std::vector<Task> tasks;
  for (int i = 0; i < sweep.repeats; ++i) {
    std::size_t slot = 0;
    for (int m : memories) {
      for (Method method : sweep.methods) {
        SolveConfig config = sweep.config;
        config.memory = m;
        tasks.push_back({i, slot++, method, config,
                         std::string(to_string(method)) + "_m" + std::to_string(m) + ".csv"});
      }
    }
  }
  MemorySweepSummary summary{sweep, memories,
                             empty_summaries(instances, sweep, 2 * memories.size())};
  execute(instances, tasks, summary.instances, jobs);
  write_json(out_dir / "summary.json", to_json(summary));
  return summary;
}

std::vector<SuiteReport> cmd_verify(const VerifyOptions& options,
                                    const std::optional<fs::path>& out_dir) {
  auto reports = run_invariant_suites(options);
  if (out_dir) {
    fs::create_directories(*out_dir);
    json suites = json::array();
    bool all = true;
    for (const auto& r : reports) {
      all = all && r.result.passed;
      suites.push_back({{"name", r.name},
                        {"module", r.module},
                        {"passed", r.result.passed},
                        {"detail", r.result.detail},
                        {"seconds", r.seconds}});
    }
    write_json(*out_dir / "verify.json",
               {{"seed", options.seed}, {"probes", options.probes}, {"passed", all},
                {"suites", suites}});
  }
  return reports;
}

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json optional_vector(const std::optional<Vector>& v) {
  return v ? vector_json(*v) : json(nullptr);
}

std::string_view cone_name(ConeKind k) {
  switch (k) {
    case ConeKind::free: return "free";
    case ConeKind::zero: return "zero";
    case ConeKind::nonneg: return "nonneg";
    case ConeKind::soc: return "soc";
  }
  return "?";
}

json cone_json(const ConeSpec& cone) {
  json out = json::array();
  for (const auto& b : cone.blocks()) {
    out.push_back({{"kind", std::string(cone_name(b.kind))}, {"dim", b.dim}});
  }
  return out;
}

template <typename... F>
struct Overloaded : F... {
  using F::operator()...;
};
template <typename... F>
Overloaded(F...) -> Overloaded<F...>;

}  // namespace

json instance_to_json(const GeneratedProblem& gp) {
  json data = std::visit(
      Overloaded{
          [](const LogRegInstance& i) -> json {
            return {{"features", matrix_json(i.features)},
                    {"labels", vector_json(i.labels)},
                    {"lambda", i.lambda},
                    {"step", i.step}};
          },
          [](const NnlsInstance& i) -> json {
            return {{"a", matrix_json(i.a)}, {"b", vector_json(i.b)}, {"step", i.step}};
          },
          [](const CcmgInstance& i) -> json {
            return {{"payoff", matrix_json(i.payoff)}, {"step", i.step}};
          },
          [](const EnrInstance& i) -> json {
            return {{"a", matrix_json(i.a)}, {"b", vector_json(i.b)}, {"mu", i.mu},
                    {"beta", i.beta},        {"step", i.step}};
          },
          [](const HbInstance& i) -> json {
            return {{"a", matrix_json(i.a)},
                    {"b", vector_json(i.b)},
                    {"mu", i.mu},
                    {"lipschitz", i.lipschitz},
                    {"alpha", i.alpha},
                    {"beta", i.beta},
                    {"col_scale", optional_vector(i.col_scale)}};
          },
          [](const FacilityInstance& i) -> json {
            return {{"clients", matrix_json(i.clients)}, {"alpha", i.alpha}};
          },
          [](const ApLpInstance& i) -> json {
            return {{"a", matrix_json(i.a)},
                    {"b", vector_json(i.b)},
                    {"c", vector_json(i.c)},
                    {"cone", cone_json(i.cone)},
                    {"row_scale", optional_vector(i.row_scale)},
                    {"col_scale", optional_vector(i.col_scale)},
                    {"x_star", optional_vector(i.x_star)},
                    {"y_star", optional_vector(i.y_star)},
                    {"s_star", optional_vector(i.s_star)}};
          },
          [](const ConicProgram& i) -> json {
            return {{"a", matrix_json(i.a)},
                    {"b", vector_json(i.b)},
                    {"c", vector_json(i.c)},
                    {"cone", cone_json(i.cone)},
                    {"x_star", optional_vector(i.x_star)},
                    {"y_star", optional_vector(i.y_star)},
                    {"s_star", optional_vector(i.s_star)}};
          },
          [](const MdpInstance& i) -> json {
            json transitions = json::array();
            for (const auto& p : i.transitions) {
              json entries = json::array();
              for (Eigen::Index r = 0; r < p.outerSize(); ++r) {
                for (SparseMatrix::InnerIterator it(p, r); it; ++it) {
                  entries.push_back({it.row(), it.col(), it.value()});
                }
              }
              transitions.push_back(entries);
            }
            return {{"states", i.states},
                    {"actions", i.actions},
                    {"gamma", i.gamma},
                    {"rewards", matrix_json(i.rewards)},
                    {"transitions", transitions}};
          },
      },
      *gp.instance);
  return {{"family", std::string(to_string(gp.family))},
          {"dim", gp.problem.dim},
          {"regime",
           {{"kind", gp.problem.regime.kind == NormRegime::contractive ? "contractive"
                                                                       : "nonexpansive"},
            {"gamma", gp.problem.regime.gamma},
            {"norm", gp.problem.regime.norm}}},
          {"data", data},
          {"x0", vector_json(gp.x0)},
          {"known_solution", optional_vector(gp.problem.known_solution)}};
}

void cmd_generate(const RunSpec& spec, const fs::path& out_dir) {
  spec.validate();
  fs::create_directories(out_dir);
  for (int i = 0; i < spec.repeats; ++i) {
    SeededRng rng(spec.config.seed + static_cast<std::uint64_t>(i));
    const auto gp = generate(spec.family, rng, spec.sizes, spec.csv_path);
    char name[32];
    std::snprintf(name, sizeof name, "instance_%03d.json", i);
    write_json(out_dir / name, instance_to_json(gp));
  }
}

}  // namespace aa
