#include "soficlen/job.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace soficlen {

using Json = nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

const ConfigEntry* ConfigSection::find(std::string_view key) const {
  const ConfigEntry* found = nullptr;
  for (const auto& e : entries)
    if (e.key == key) found = &e;
  return found;
}

std::vector<const ConfigEntry*> ConfigSection::all(std::string_view key) const {
  std::vector<const ConfigEntry*> out;
  for (const auto& e : entries)
    if (e.key == key) out.push_back(&e);
  return out;
}

void Config::fail(std::size_t line, const std::string& message) const {
  throw ConfigError(source + ":" + std::to_string(line) + ": " + message);
}

Config Config::parse(std::istream& in, std::string source) {
  Config cfg;
  cfg.source = std::move(source);
  cfg.sections.push_back({"", 0, {}});
  std::set<std::string> seen;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = trim(raw);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text[0] == '[') {
      if (text.back() != ']') cfg.fail(line, "unterminated section header");
      auto name = trim(std::string_view(text).substr(1, text.size() - 2));
      if (name.empty()) cfg.fail(line, "empty section name");
      if (!seen.insert(name).second) cfg.fail(line, "duplicate section [" + name + "]");
      cfg.sections.push_back({name, line, {}});
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) cfg.fail(line, "expected `key = value`");
    auto key = trim(std::string_view(text).substr(0, eq));
    if (key.empty()) cfg.fail(line, "missing key before `=`");
    cfg.sections.back().entries.push_back({key, trim(std::string_view(text).substr(eq + 1)), line});
  }
  return cfg;
}

const ConfigSection* Config::section(std::string_view name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

namespace {

const std::vector<std::pair<Quantity, std::string>> kQuantities = {
    {Quantity::MrkRelative, "mrk-relative"},
    {Quantity::MrkFp, "mrk-fp"},
    {Quantity::VrkFp, "vrk-fp"},
    {Quantity::AdditionCheck, "addition-check"},
    {Quantity::Folner, "folner"},
    {Quantity::FiniteOracle, "finite-oracle"},
    {Quantity::LaurentOracle, "laurent-oracle"},
    {Quantity::Defect, "defect"},
    {Quantity::DirectFinite, "direct-finite"},
    {Quantity::OracleCompare, "oracle-compare"},
};

const std::map<std::string, std::set<std::string>> kAllowedKeys = {
    {"", {"quantity", "group", "ring"}},
    {"sofic", {"model", "schedule", "seeds", "dims"}},
    {"matrix", {"size", "entry", "file"}},
    {"inverse", {"size", "entry", "file"}},
    {"pair", {"ambient", "a", "b", "f_radius"}},
    {"folner", {"boxes"}},
    {"oracle", {"kind", "seed", "tolerance"}},
    {"tolerance", {"snap", "stabilization", "addition"}},
    {"defect", {"radius"}},
    {"output", {"json", "csv"}},
};

}  // namespace

std::string quantity_name(Quantity q) {
  for (const auto& [k, name] : kQuantities)
    if (k == q) return name;
  throw std::logic_error("unknown quantity");
}

Quantity parse_quantity(std::string_view text) {
  for (const auto& [k, name] : kQuantities)
    if (name == text) return k;
  std::string known;
  for (const auto& [k, name] : kQuantities) known += (known.empty() ? "" : ", ") + name;
  throw std::invalid_argument("unknown quantity `" + std::string(text) + "` (expected one of " + known + ")");
}

namespace {

class JobParser {
 public:
  JobParser(const Config& cfg, std::filesystem::path base) : cfg_(cfg), base_(std::move(base)) {}

  JobSpec parse() {
    check_keys();
    JobSpec job;
    job.source = cfg_.source;
    const auto& top = cfg_.sections.front();
    job.quantity = guarded(require(top, "quantity"), [](const std::string& v) { return parse_quantity(v); });
    job.group = guarded(require(top, "group"), [&](const std::string& v) { return make_group(parse_group(v)); });
    if (const auto* ring = top.find("ring")) {
      job.ring = guarded(*ring, [](const std::string& v) { return CoefficientRing::parse(v); });
    }
    parse_tolerances(job);
    parse_output(job);
    switch (job.quantity) {
      case Quantity::MrkRelative:
        parse_pair(job);
        parse_sofic(job);
        break;
      case Quantity::MrkFp:
      case Quantity::VrkFp:
      case Quantity::AdditionCheck:
        job.matrix = parse_matrix(job, "matrix");
        parse_sofic(job);
        break;
      case Quantity::Folner:
        parse_pair(job);
        parse_boxes(job);
        break;
      case Quantity::FiniteOracle:
      case Quantity::LaurentOracle:
        job.matrix = parse_matrix(job, "matrix");
        parse_oracle(job, false);
        break;
      case Quantity::Defect:
        parse_sofic(job);
        if (const auto* s = cfg_.section("defect")) {
          if (const auto* r = s->find("radius")) job.defect_radius = parse_int(*r, 0, 8);
        }
        break;
      case Quantity::DirectFinite:
        job.matrix = parse_matrix(job, "matrix");
        job.inverse = parse_matrix(job, "inverse");
        break;
      case Quantity::OracleCompare:
        parse_oracle(job, true);
        if (job.oracle == "folner") {
          parse_pair(job);
          parse_boxes(job);
        } else {
          job.matrix = parse_matrix(job, "matrix");
        }
        parse_sofic(job);
        break;
    }
    return job;
  }

 private:
  const Config& cfg_;
  std::filesystem::path base_;

  void check_keys() const {
    for (const auto& s : cfg_.sections) {
      const auto it = kAllowedKeys.find(s.name);
      if (it == kAllowedKeys.end()) cfg_.fail(s.line, "unknown section [" + s.name + "]");
      for (const auto& e : s.entries) {
        if (!it->second.count(e.key)) {
          cfg_.fail(e.line, "unknown key `" + e.key + "`" + (s.name.empty() ? "" : " in [" + s.name + "]"));
        }
        const bool repeatable = e.key == "entry" || e.key == "a" || e.key == "b";
        if (!repeatable && s.all(e.key).size() > 1 && s.all(e.key).front() != &e) {
          cfg_.fail(e.line, "duplicate key `" + e.key + "`");
        }
      }
    }
  }

  template <class Fn>
  auto guarded(const ConfigEntry& e, Fn fn) const -> decltype(fn(e.value)) {
    try {
      return fn(e.value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& ex) {
      cfg_.fail(e.line, ex.what());
    }
  }

  const ConfigEntry& require(const ConfigSection& s, std::string_view key) const {
    if (const auto* e = s.find(key)) return *e;
    cfg_.fail(s.line, "missing key `" + std::string(key) + "`" + (s.name.empty() ? "" : " in [" + s.name + "]"));
  }

  const ConfigSection& require_section(std::string_view name) const {
    if (const auto* s = cfg_.section(name)) return *s;
    cfg_.fail(1, "missing section [" + std::string(name) + "]");
  }

  long long parse_int(const ConfigEntry& e, long long lo, long long hi) const {
    return guarded(e, [&](const std::string& v) {
      std::size_t used = 0;
      const long long x = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument("expected an integer, got `" + v + "`");
      if (x < lo || x > hi) {
        throw std::invalid_argument("value " + v + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      }
      return x;
    });
  }

  double parse_positive(const ConfigEntry& e) const {
    return guarded(e, [&](const std::string& v) {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size() || !(x > 0)) throw std::invalid_argument("expected a positive number, got `" + v + "`");
      return x;
    });
  }

  Group parse_group(const std::string& v) const {
    if (v.rfind("table:", 0) == 0) {
      std::filesystem::path p = v.substr(6);
      if (p.is_relative()) p = base_ / p;
      return Group::read_table_file(p.string());
    }
    return Group::parse(v);
  }

  void parse_tolerances(JobSpec& job) const {
    const auto* s = cfg_.section("tolerance");
    if (!s) return;
    if (const auto* e = s->find("snap")) job.snap_tolerance = parse_positive(*e);
    if (const auto* e = s->find("stabilization")) job.stabilization_tolerance = parse_positive(*e);
    if (const auto* e = s->find("addition")) job.addition_tolerance = parse_positive(*e);
  }

  void parse_output(JobSpec& job) const {
    auto stem = std::filesystem::path(cfg_.source).stem().string();
    if (stem.empty()) stem = "report";
    job.json_name = stem + ".json";
    job.csv_name = stem + ".csv";
    const auto* s = cfg_.section("output");
    if (!s) return;
    if (const auto* e = s->find("json")) job.json_name = e->value;
    if (const auto* e = s->find("csv")) job.csv_name = e->value;
  }

  void parse_sofic(JobSpec& job) const {
    const auto& s = require_section("sofic");
    const Group& g = *job.group;
    std::string model;
    switch (g.family()) {
      case GroupFamily::IntegerLine: model = "cyclic"; break;
      case GroupFamily::Lattice: model = "torus"; break;
      case GroupFamily::Free: model = "random-free"; break;
      case GroupFamily::Finite: model = "translation"; break;
    }
    if (const auto* e = s.find("model")) {
      if (e->value != model) {
        cfg_.fail(e->line, "sofic model `" + e->value + "` does not fit group " + g.name() + " (use `" + model + "`)");
      }
    }
    job.model = model;
    if (const auto* e = s.find("seeds")) {
      job.schedule.seeds = guarded(*e, [](const std::string& v) { return SoficSchedule::parse_seeds(v); });
    }
    if (model == "torus") {
      const auto& dims = require(s, "dims");
      guarded(dims, [&](const std::string& v) {
        std::size_t start = 0;
        while (start <= v.size()) {
          const auto comma = v.find(',', start);
          const auto piece = trim(std::string_view(v).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
          auto d = SoficSchedule::parse_dims(piece);
          if (d.size() != static_cast<std::size_t>(g.rank())) {
            throw std::invalid_argument("dims `" + piece + "` need " + std::to_string(g.rank()) + " factors");
          }
          std::size_t total = 1;
          for (auto x : d) total *= x;
          job.torus_dims.push_back(d);
          job.schedule.sizes.push_back(total);
          if (comma == std::string::npos) break;
          start = comma + 1;
        }
        return 0;
      });
      if (s.find("schedule")) cfg_.fail(s.find("schedule")->line, "torus schedules are given by `dims`");
    } else if (model == "translation") {
      job.schedule.sizes = {g.order()};
      if (s.find("schedule")) cfg_.fail(s.find("schedule")->line, "translation maps have d = |G|; drop `schedule`");
    } else {
      job.schedule.sizes = guarded(require(s, "schedule"), [](const std::string& v) { return SoficSchedule::parse_sizes(v); });
    }
    try {
      job.schedule.validate();
      if (model == "random-free" && job.schedule.sizes.front() < 2) {
        throw std::invalid_argument("random free approximations need d >= 2");
      }
    } catch (const std::invalid_argument& ex) {
      const auto* e = s.find("schedule") ? s.find("schedule") : s.find("dims");
      cfg_.fail(e ? e->line : s.line, ex.what());
    }
  }

  GroupRingMatrix parse_matrix(const JobSpec& job, std::string_view name) const {
    const auto& s = require_section(name);
    if (const auto* file = s.find("file")) {
      if (s.find("size") || s.find("entry")) cfg_.fail(file->line, "use either `file` or `size`/`entry`, not both");
      std::filesystem::path p = file->value;
      if (p.is_relative()) p = base_ / p;
      std::ifstream in(p);
      if (!in) cfg_.fail(file->line, "cannot open matrix file " + p.string());
      auto m = guarded(*file, [&](const std::string&) { return read_matrix(in, job.group); });
      if (!(m.ring() == job.ring)) cfg_.fail(file->line, "matrix file ring " + m.ring().name() + " differs from " + job.ring.name());
      return m;
    }
    const auto& size = require(s, "size");
    const auto [m, n] = guarded(size, [](const std::string& v) {
      std::istringstream ss(v);
      long long a = 0, b = 0;
      std::string rest;
      if (!(ss >> a >> b) || (ss >> rest) || a <= 0 || b <= 0) throw std::invalid_argument("expected `size = m n` with positive m, n");
      return std::pair<std::size_t, std::size_t>(a, b);
    });
    GroupRingMatrix out(job.group, job.ring, m, n);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto* e : s.all("entry")) {
      guarded(*e, [&](const std::string& v) {
        std::istringstream ss(v);
        long long i = -1, j = -1;
        if (!(ss >> i >> j)) throw std::invalid_argument("expected `entry = i j terms`");
        if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= m || static_cast<std::size_t>(j) >= n) {
          throw std::invalid_argument("entry index (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range");
        }
        if (!seen.emplace(i, j).second) throw std::invalid_argument("duplicate entry (" + std::to_string(i) + ", " + std::to_string(j) + ")");
        std::string terms;
        std::getline(ss, terms);
        out.set(i, j, GroupRingElement::parse(job.group, job.ring, trim(terms)));
        return 0;
      });
    }
    return out;
  }

  void parse_pair(JobSpec& job) const {
    const auto& s = require_section("pair");
    const auto as = s.all("a");
    if (as.empty()) cfg_.fail(s.line, "[pair] needs at least one `a` line");
    for (const auto* e : as) {
      job.A.push_back(guarded(*e, [&](const std::string& v) { return FreeModuleVector::parse(job.group, job.ring, v); }));
    }
    job.ambient = job.A.front().rank();
    if (const auto* e = s.find("ambient")) job.ambient = parse_int(*e, 1, 64);
    for (const auto* e : s.all("b")) {
      job.B.push_back(guarded(*e, [&](const std::string& v) { return FreeModuleVector::parse(job.group, job.ring, v); }));
    }
    if (job.B.empty()) job.B = FreeModuleVector::standard_basis(job.group, job.ring, job.ambient);
    for (const auto* list : {&job.A, &job.B}) {
      for (const auto& v : *list) {
        if (v.rank() != job.ambient) {
          cfg_.fail(s.line, "vector `" + v.format() + "` has " + std::to_string(v.rank()) + " components, ambient rank is " +
                                std::to_string(job.ambient));
        }
      }
    }
    if (const auto* e = s.find("f_radius")) job.f_radius = parse_int(*e, 0, 6);
  }

  void parse_boxes(JobSpec& job) const {
    const auto& s = require_section("folner");
    const auto& e = require(s, "boxes");
    guarded(e, [&](const std::string& v) {
      std::size_t start = 0;
      while (true) {
        const auto comma = v.find(',', start);
        job.boxes.push_back(FolnerBox::parse(trim(std::string_view(v).substr(start, comma == std::string::npos ? std::string::npos : comma - start))));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      return 0;
    });
  }

  void parse_oracle(JobSpec& job, bool need_kind) const {
    const auto* s = cfg_.section("oracle");
    if (!s) {
      if (need_kind) cfg_.fail(1, "missing section [oracle]");
      return;
    }
    if (const auto* e = s->find("kind")) {
      if (e->value != "folner" && e->value != "finite" && e->value != "laurent") {
        cfg_.fail(e->line, "oracle kind must be folner, finite or laurent");
      }
      job.oracle = e->value;
    } else if (need_kind) {
      cfg_.fail(s->line, "missing key `kind` in [oracle]");
    }
    if (const auto* e = s->find("seed")) job.oracle_seed = static_cast<std::uint64_t>(parse_int(*e, 0, INT64_MAX));
    if (const auto* e = s->find("tolerance")) job.compare_tolerance = parse_positive(*e);
  }
};

}  // namespace

SoficFactory JobSpec::factory() const {
  const auto g = group;
  if (model == "cyclic") return [](std::size_t d, std::uint64_t) { return build_cyclic(d); };
  if (model == "random-free") return [g](std::size_t d, std::uint64_t seed) { return build_random_free(g, d, seed); };
  if (model == "translation") return [g](std::size_t, std::uint64_t) { return build_translation(g); };
  if (model == "torus") {
    std::map<std::size_t, std::vector<std::size_t>> by_size;
    for (const auto& dims : torus_dims) {
      std::size_t total = 1;
      for (auto x : dims) total *= x;
      by_size[total] = dims;
    }
    return [g, by_size](std::size_t d, std::uint64_t) { return build_torus(g, by_size.at(d)); };
  }
  throw std::logic_error("job has no sofic model");
}

JobSpec parse_job(std::istream& in, const std::string& source, const std::filesystem::path& base_dir) {
  const auto cfg = Config::parse(in, source);
  return JobParser(cfg, base_dir).parse();
}

JobSpec load_job(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open job file");
  return parse_job(in, path.string(), path.parent_path());
}

namespace {

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json integer_json(const mpz_class& z) {
  if (z.fits_slong_p()) return Json(static_cast<std::int64_t>(z.get_si()));
  return Json(z.get_str());
}

std::string rational_text(const mpq_class& q) {
  return q.get_den() == 1 ? q.get_num().get_str() : q.get_str();
}

Json estimate_json(const MeanLengthEstimate& est) {
  Json j;
  j["quantity"] = est.quantity;
  Json series = Json::array();
  for (const auto& p : est.series) {
    series.push_back({{"d", p.d},
                      {"seed", p.seed},
                      {"value_num", integer_json(p.value.get_num())},
                      {"value_den", integer_json(p.value.get_den())}});
  }
  j["series"] = std::move(series);
  j["headline"] = est.headline;
  j["headline_exact"] = rational_text(est.headline_exact);
  j["spread"] = est.spread;
  j["previous_headline"] = est.previous_headline ? Json(*est.previous_headline) : Json(nullptr);
  j["stabilized"] = est.stabilized;
  j["snapped"] = est.snapped ? Json(rational_text(*est.snapped)) : Json(nullptr);
  j["certified"] = est.certified;
  j["duality_checks"] = est.duality_checks;
  if (est.defect_summary) {
    const auto& s = *est.defect_summary;
    j["defect_summary"] = {{"d", s.d},
                           {"window", s.window},
                           {"min_multiplicativity", s.min_multiplicativity},
                           {"mean_multiplicativity", s.mean_multiplicativity},
                           {"min_separation", s.min_separation},
                           {"mean_separation", s.mean_separation}};
  } else {
    j["defect_summary"] = nullptr;
  }
  return j;
}

std::string estimate_csv(const MeanLengthEstimate& est) {
  std::string out = "d,seed,value_num,value_den,value\n";
  for (const auto& p : est.series) {
    out += std::to_string(p.d) + "," + std::to_string(p.seed) + "," + p.value.get_num().get_str() + "," +
           p.value.get_den().get_str() + "," + num(to_double(p.value)) + "\n";
  }
  return out;
}

EstimateOptions estimate_options(const JobSpec& job, const RunOptions& run) {
  EstimateOptions o;
  o.snap_tolerance = job.snap_tolerance;
  o.stabilization_tolerance = job.stabilization_tolerance;
  o.jobs = run.jobs;
  return o;
}

MeanLengthEstimate run_relative(const JobSpec& job, const RunOptions& run) {
  return estimate_mean_length(job.ambient, job.A, {job.group->ball(job.f_radius)}, {job.B}, job.schedule,
                              job.factory(), estimate_options(job, run));
}

void note_stability(const MeanLengthEstimate& est, JobOutcome& out) {
  if (!est.stabilized) {
    out.warnings.push_back("series has not stabilized: last headline " + num(est.headline) + " vs previous " +
                           num(est.previous_headline.value_or(0)));
  }
  if (!est.certified) out.warnings.push_back("some rational ranks were not certified by agreeing primes");
}

void log(const RunOptions& run, const std::string& message) {
  if (run.log) *run.log << message << '\n';
}

}  // namespace

JobOutcome run_job(const JobSpec& job, const RunOptions& run) {
  JobOutcome out;
  Json j;
  j["job"] = quantity_name(job.quantity);
  j["group"] = job.group->name();
  j["ring"] = job.ring.name();
  log(run, "running " + quantity_name(job.quantity) + " on " + job.group->name());

  switch (job.quantity) {
    case Quantity::MrkRelative:
    case Quantity::MrkFp:
    case Quantity::VrkFp: {
      const auto est = job.quantity == Quantity::MrkRelative ? run_relative(job, run)
                       : job.quantity == Quantity::MrkFp
                           ? estimate_mrk_fp(*job.matrix, job.schedule, job.factory(), estimate_options(job, run))
                           : estimate_vrk_fp(*job.matrix, job.schedule, job.factory(), estimate_options(job, run));
      const auto body = estimate_json(est);
      for (const auto& [k, v] : body.items()) j[k] = v;
      out.csv = estimate_csv(est);
      note_stability(est, out);
      break;
    }
    case Quantity::AdditionCheck: {
      const auto rep = check_addition(*job.matrix, job.schedule, job.factory(), estimate_options(job, run));
      Json points = Json::array();
      out.csv = "d,seed,relative,principal,quotient,residual_routes,residual_sum\n";
      for (const auto& p : rep.points) {
        points.push_back({{"d", p.d},
                          {"seed", p.seed},
                          {"relative", rational_text(p.relative)},
                          {"principal", rational_text(p.principal)},
                          {"quotient", rational_text(p.quotient)},
                          {"residual_routes", rational_text(p.residual_routes)},
                          {"residual_sum", rational_text(p.residual_sum)}});
        out.csv += std::to_string(p.d) + "," + std::to_string(p.seed) + "," + rational_text(p.relative) + "," +
                   rational_text(p.principal) + "," + rational_text(p.quotient) + "," +
                   rational_text(p.residual_routes) + "," + rational_text(p.residual_sum) + "\n";
      }
      j["ambient"] = rep.ambient;
      j["points"] = std::move(points);
      j["max_residual_routes"] = rational_text(rep.max_residual_routes);
      j["max_residual_sum"] = rational_text(rep.max_residual_sum);
      j["submodule_headline"] = rep.submodule_headline;
      j["quotient_headline"] = rep.quotient_headline;
      j["tolerance"] = job.addition_tolerance;
      const bool pass = to_double(rep.max_residual_routes) <= job.addition_tolerance &&
                        to_double(rep.max_residual_sum) <= job.addition_tolerance;
      j["pass"] = pass;
      if (!pass) out.exit_code = 2;
      break;
    }
    case Quantity::Folner: {
      const auto series = folner_mean_length(job.A, job.boxes);
      Json arr = Json::array();
      out.csv = "box,volume,value_num,value_den,value\n";
      for (const auto& p : series) {
        arr.push_back({{"box", p.box.format()},
                       {"volume", p.box.volume()},
                       {"value_num", integer_json(p.value.get_num())},
                       {"value_den", integer_json(p.value.get_den())}});
        out.csv += p.box.format() + "," + std::to_string(p.box.volume()) + "," + p.value.get_num().get_str() + "," +
                   p.value.get_den().get_str() + "," + num(to_double(p.value)) + "\n";
      }
      j["quantity"] = "mL";
      j["series"] = std::move(arr);
      j["value"] = to_double(series.back().value);
      j["value_exact"] = rational_text(series.back().value);
      break;
    }
    case Quantity::FiniteOracle: {
      const auto v = finite_group_vrk(*job.matrix);
      j["quantity"] = "vrk";
      j["value"] = to_double(v);
      j["value_exact"] = rational_text(v);
      out.csv = "value_num,value_den,value\n" + v.get_num().get_str() + "," + v.get_den().get_str() + "," + num(to_double(v)) + "\n";
      break;
    }
    case Quantity::LaurentOracle: {
      const auto r = laurent_rank(*job.matrix, job.oracle_seed);
      j["rank"] = r.rank;
      j["vrk"] = r.vrk;
      j["agreement"] = r.agreement;
      j["evaluation_ranks"] = r.evaluation_ranks;
      out.csv = "evaluation,rank\n";
      for (std::size_t i = 0; i < r.evaluation_ranks.size(); ++i) {
        out.csv += std::to_string(i) + "," + std::to_string(r.evaluation_ranks[i]) + "\n";
      }
      if (!r.agreement) out.warnings.push_back("evaluation ranks disagree; reporting the maximum");
      break;
    }
    case Quantity::Defect: {
      const auto window = job.group->ball(job.defect_radius);
      const auto factory = job.factory();
      Json reports = Json::array();
      out.csv = "d,seed,kind,s,t,count,fraction\n";
      for (const auto& [d, seed] : job.schedule.points()) {
        const auto rep = defect(factory(d, seed), window);
        Json mult = Json::array(), sep = Json::array();
        auto emit = [&](const char* kind, const PairFraction& p, Json& arr) {
          arr.push_back({{"s", job.group->format(p.s)}, {"t", job.group->format(p.t)}, {"count", p.count}, {"fraction", p.fraction}});
          out.csv += std::to_string(d) + "," + std::to_string(seed) + "," + kind + "," + job.group->format(p.s) + "," +
                     job.group->format(p.t) + "," + std::to_string(p.count) + "," + num(p.fraction) + "\n";
        };
        for (const auto& p : rep.multiplicativity) emit("multiplicativity", p, mult);
        for (const auto& p : rep.separation) emit("separation", p, sep);
        reports.push_back({{"d", d},
                           {"seed", seed},
                           {"min_multiplicativity", rep.min_multiplicativity()},
                           {"mean_multiplicativity", rep.mean_multiplicativity()},
                           {"min_separation", rep.min_separation()},
                           {"mean_separation", rep.mean_separation()},
                           {"multiplicativity", std::move(mult)},
                           {"separation", std::move(sep)}});
      }
      j["window_radius"] = job.defect_radius;
      j["reports"] = std::move(reports);
      break;
    }
    case Quantity::DirectFinite: {
      const auto verdict = check_direct_finite(*job.matrix, *job.inverse);
      j["verdict"] = verdict_name(verdict);
      if (const auto* c = std::get_if<direct_finite::Counterexample>(&verdict)) {
        std::ostringstream ss;
        write_matrix(ss, c->ba);
        j["ba"] = ss.str();
        out.exit_code = 2;
      }
      out.csv = "verdict\n" + verdict_name(verdict) + "\n";
      break;
    }
    case Quantity::OracleCompare: {
      MeanLengthEstimate est;
      mpq_class oracle_value;
      Json oracle;
      oracle["kind"] = job.oracle;
      if (job.oracle == "folner") {
        est = run_relative(job, run);
        const auto series = folner_mean_length(job.A, job.boxes);
        oracle_value = series.back().value;
        oracle["box"] = series.back().box.format();
      } else if (job.oracle == "finite") {
        est = estimate_vrk_fp(*job.matrix, job.schedule, job.factory(), estimate_options(job, run));
        oracle_value = finite_group_vrk(*job.matrix);
      } else {
        est = estimate_vrk_fp(*job.matrix, job.schedule, job.factory(), estimate_options(job, run));
        const auto r = laurent_rank(*job.matrix, job.oracle_seed);
        oracle_value = static_cast<long>(r.vrk);
        oracle["rank"] = r.rank;
        oracle["agreement"] = r.agreement;
      }
      const auto cmp = compare(est, oracle_value, job.compare_tolerance);
      const auto body = estimate_json(est);
      for (const auto& [k, v] : body.items()) j[k] = v;
      oracle["value"] = to_double(oracle_value);
      oracle["value_exact"] = rational_text(oracle_value);
      oracle["residual"] = cmp.residual;
      oracle["tolerance"] = cmp.tolerance;
      oracle["unstable"] = cmp.unstable;
      oracle["pass"] = cmp.pass;
      j["oracle"] = std::move(oracle);
      out.csv = estimate_csv(est);
      note_stability(est, out);
      if (!cmp.pass) out.exit_code = 2;
      break;
    }
  }
  j["warnings"] = out.warnings;
  out.json = j.dump(2) + "\n";
  return out;
}

}  // namespace soficlen
