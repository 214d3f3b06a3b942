#include "chronos/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace chronos {

using nlohmann::json;

std::string format_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("cannot serialize a non-finite number");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file '" + path.string() + "'");
  out << contents;
  if (!out) throw std::runtime_error("error writing file '" + path.string() + "'");
}

namespace {

// ---- writing -------------------------------------------------------------

bool is_scalar(const json& j) { return !j.is_array() && !j.is_object(); }

void emit(std::string& out, const json& j, int depth);

void emit_scalar(std::string& out, const json& j) {
  switch (j.type()) {
    case json::value_t::number_float:
      out += std::isfinite(j.get<double>()) ? format_double(j.get<double>()) : "null";
      break;
    default:
      out += j.dump();
  }
}

void newline(std::string& out, int depth) {
  out += '\n';
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
}

void emit(std::string& out, const json& j, int depth) {
  if (is_scalar(j)) {
    emit_scalar(out, j);
  } else if (j.is_array()) {
    const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return is_scalar(e); });
    out += '[';
    bool first = true;
    for (const auto& e : j) {
      if (!first) out += flat ? ", " : ",";
      if (!flat) newline(out, depth + 1);
      emit(out, e, depth + 1);
      first = false;
    }
    if (!flat && !j.empty()) newline(out, depth);
    out += ']';
  } else {
    out += '{';
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ',';
      newline(out, depth + 1);
      out += json(it.key()).dump();
      out += ": ";
      emit(out, it.value(), depth + 1);
      first = false;
    }
    if (!j.empty()) newline(out, depth);
    out += '}';
  }
}

std::string render(const json& j) {
  std::string out;
  emit(out, j, 0);
  out += '\n';
  return out;
}

// ---- reading -------------------------------------------------------------

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError((path.empty() ? std::string("/") : path) + ": " + what);
}

json parse_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(path, "expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail(path, "unknown key '" + it.key() + "'");
}

const json& field(const json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing key '") + key + "'");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

const json& array(const json& j, const std::string& path, std::optional<std::size_t> size = std::nullopt) {
  if (!j.is_array()) fail(path, "expected an array");
  if (size && j.size() != *size)
    fail(path, "expected " + std::to_string(*size) + " entries, found " + std::to_string(j.size()));
  return j;
}

std::vector<std::string> names(const json& j, const std::string& path) {
  array(j, path);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string()) fail(path + "/" + std::to_string(i), "expected a string");
    if (!seen.insert(j[i].get<std::string>()).second) fail(path + "/" + std::to_string(i), "duplicate name");
    out.push_back(j[i].get<std::string>());
  }
  if (out.empty()) fail(path, "must not be empty");
  return out;
}

/// Index given either directly or by name.
std::size_t resolve(const json& j, const std::string& path, const std::vector<std::string>& list) {
  if (j.is_string()) {
    const auto it = std::find(list.begin(), list.end(), j.get<std::string>());
    if (it == list.end()) fail(path, "unknown name '" + j.get<std::string>() + "'");
    return static_cast<std::size_t>(it - list.begin());
  }
  const std::size_t i = count(j, path);
  if (i >= list.size()) fail(path, "index out of range");
  return i;
}

/// Dense nested array of the given shape, flattened row-major.
void dense(const json& j, const std::string& path, const std::vector<std::size_t>& shape, std::size_t dim,
           std::vector<double>& out) {
  array(j, path, shape[dim]);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "/" + std::to_string(i);
    if (dim + 1 == shape.size())
      out.push_back(number(j[i], p));
    else
      dense(j[i], p, shape, dim + 1, out);
  }
}

std::vector<double> dense(const json& j, const std::string& path, const std::vector<std::size_t>& shape) {
  std::vector<double> out;
  dense(j, path, shape, 0, out);
  return out;
}

json nest(const std::vector<double>& flat, const std::vector<std::size_t>& shape, std::size_t dim = 0,
          std::size_t offset = 0) {
  json out = json::array();
  std::size_t stride = 1;
  for (std::size_t d = dim + 1; d < shape.size(); ++d) stride *= shape[d];
  for (std::size_t i = 0; i < shape[dim]; ++i) {
    if (dim + 1 == shape.size())
      out.push_back(flat[offset + i]);
    else
      out.push_back(nest(flat, shape, dim + 1, offset + i * stride));
  }
  return out;
}

SojournDistribution parse_distribution(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const json& type = field(j, path, "type");
  if (!type.is_string()) fail(path + "/type", "expected a string");
  const std::string tag = type.get<std::string>();
  try {
    if (tag == "inverse_gaussian") {
      allow_keys(j, path, {"type", "mu", "lambda"});
      return SojournDistribution::inverse_gaussian(number(field(j, path, "mu"), path + "/mu"),
                                                   number(field(j, path, "lambda"), path + "/lambda"));
    }
    if (tag == "atom") {
      allow_keys(j, path, {"type", "value"});
      return SojournDistribution::atom(number(field(j, path, "value"), path + "/value"));
    }
    if (tag == "truncated_gaussian") {
      allow_keys(j, path, {"type", "mu", "sigma", "lower"});
      if (j.contains("lower") && number(j["lower"], path + "/lower") != 0.0)
        fail(path + "/lower", "only a lower bound of 0 is supported");
      return SojournDistribution::truncated_gaussian(number(field(j, path, "mu"), path + "/mu"),
                                                     number(field(j, path, "sigma"), path + "/sigma"));
    }
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  fail(path + "/type", "unknown distribution type '" + tag + "'");
}

json distribution_json(const SojournDistribution& d) {
  json j;
  j["type"] = std::string(d.type_name());
  std::visit(
      [&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, InverseGaussian>) {
          j["mu"] = law.mu;
          j["lambda"] = law.lambda;
        } else if constexpr (std::is_same_v<T, DeterministicAtom>) {
          j["value"] = law.value;
        } else {
          j["mu"] = law.mu;
          j["sigma"] = law.sigma;
        }
      },
      d.variant());
  return j;
}

ModelData model_data_from_json(const json& doc) {
  allow_keys(doc, "",
             {"version", "name", "states", "actions", "admissible", "observations", "transition", "sojourn",
              "observation_kernel", "g0", "r1", "r2", "beta", "initial_belief", "mixed_observable"});
  if (count(field(doc, "", "version"), "/version") != static_cast<std::size_t>(kFormatVersion))
    fail("/version", "unsupported format version");

  ModelData d;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) fail("/name", "expected a string");
    d.name = doc["name"].get<std::string>();
  }
  d.states = names(field(doc, "", "states"), "/states");
  d.actions = names(field(doc, "", "actions"), "/actions");
  const std::size_t ns = d.states.size();
  const std::size_t na = d.actions.size();

  const json& obs = field(doc, "", "observations");
  if (obs.is_object()) {
    allow_keys(obs, "/observations", {"bins"});
    const std::size_t bins = count(field(obs, "/observations", "bins"), "/observations/bins");
    if (bins < 2) fail("/observations/bins", "need at least 2 bins");
    d.observation_bins = bins;
    for (std::size_t j = 0; j < bins; ++j) d.observations.push_back("o" + std::to_string(j));
  } else {
    d.observations = names(obs, "/observations");
  }
  const std::size_t no = d.observations.size();

  if (doc.contains("admissible")) {
    const json& adm = array(doc["admissible"], "/admissible", ns);
    d.admissible.assign(ns, std::vector<bool>(na, false));
    for (std::size_t s = 0; s < ns; ++s) {
      const std::string p = "/admissible/" + std::to_string(s);
      array(adm[s], p);
      for (std::size_t k = 0; k < adm[s].size(); ++k)
        d.admissible[s][resolve(adm[s][k], p + "/" + std::to_string(k), d.actions)] = true;
    }
  }

  d.transition = dense(field(doc, "", "transition"), "/transition", {ns, na, ns});
  d.rate_reward = dense(field(doc, "", "r2"), "/r2", {ns, na, ns});
  d.lump_reward = dense(field(doc, "", "r1"), "/r1", {ns, na});

  d.sojourn.assign(ns * na * ns, std::nullopt);
  const json& soj = array(field(doc, "", "sojourn"), "/sojourn");
  for (std::size_t k = 0; k < soj.size(); ++k) {
    const std::string p = "/sojourn/" + std::to_string(k);
    allow_keys(soj[k], p, {"s", "a", "s_next", "dist"});
    const std::size_t s = resolve(field(soj[k], p, "s"), p + "/s", d.states);
    const std::size_t a = resolve(field(soj[k], p, "a"), p + "/a", d.actions);
    const std::size_t t = resolve(field(soj[k], p, "s_next"), p + "/s_next", d.states);
    auto& slot = d.sojourn[(s * na + a) * ns + t];
    if (slot) fail(p, "duplicate sojourn entry");
    slot = parse_distribution(field(soj[k], p, "dist"), p + "/dist");
  }

  const json& kernel = field(doc, "", "observation_kernel");
  if (kernel.is_object()) {
    allow_keys(kernel, "/observation_kernel", {"beta"});
    if (!d.observation_bins) fail("/observation_kernel", "beta rows need binned observations");
    const json& rows = array(field(kernel, "/observation_kernel", "beta"), "/observation_kernel/beta");
    d.observation_kernel.assign(na * ns * no, 0.0);
    std::vector<bool> covered(na, false);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const std::string p = "/observation_kernel/beta/" + std::to_string(k);
      allow_keys(rows[k], p, {"a", "phi", "eta"});
      const std::size_t a = resolve(field(rows[k], p, "a"), p + "/a", d.actions);
      if (covered[a]) fail(p, "duplicate row for action '" + d.actions[a] + "'");
      covered[a] = true;
      const double phi = number(field(rows[k], p, "phi"), p + "/phi");
      const double eta = number(field(rows[k], p, "eta"), p + "/eta");
      std::vector<double> row;
      try {
        row = beta_observation_row(BetaDensity(phi, eta), no);
      } catch (const std::invalid_argument& e) {
        fail(p, e.what());
      }
      d.beta_observation.push_back({a, phi, eta});
      for (std::size_t t = 0; t < ns; ++t)
        for (std::size_t o = 0; o < no; ++o) d.observation_kernel[(a * ns + t) * no + o] = row[o];
    }
    for (std::size_t a = 0; a < na; ++a)
      if (!covered[a]) fail("/observation_kernel/beta", "no row for action '" + d.actions[a] + "'");
  } else {
    d.observation_kernel = dense(kernel, "/observation_kernel", {na, ns, no});
  }

  if (doc.contains("g0")) d.initial_observation_kernel = dense(doc["g0"], "/g0", {ns, no});
  d.beta = number(field(doc, "", "beta"), "/beta");
  d.initial_belief = dense(field(doc, "", "initial_belief"), "/initial_belief", {ns});

  if (doc.contains("mixed_observable")) {
    const json& mo = doc["mixed_observable"];
    allow_keys(mo, "/mixed_observable", {"observable", "hidden"});
    d.mixed_observable = MixedObservable{names(field(mo, "/mixed_observable", "observable"), "/mixed_observable/observable"),
                                         names(field(mo, "/mixed_observable", "hidden"), "/mixed_observable/hidden")};
  }
  return d;
}

json model_json(const PosmdpModel& model) {
  const ModelData& d = model.data();
  const std::size_t ns = d.states.size();
  const std::size_t na = d.actions.size();
  const std::size_t no = d.observations.size();
  json j;
  j["version"] = kFormatVersion;
  j["name"] = d.name;
  j["states"] = d.states;
  j["actions"] = d.actions;
  if (!d.admissible.empty()) {
    json adm = json::array();
    for (std::size_t s = 0; s < ns; ++s) {
      json row = json::array();
      for (std::size_t a = 0; a < na; ++a)
        if (d.admissible[s][a]) row.push_back(d.actions[a]);
      adm.push_back(row);
    }
    j["admissible"] = adm;
  }
  if (d.observation_bins)
    j["observations"] = {{"bins", *d.observation_bins}};
  else
    j["observations"] = d.observations;
  j["transition"] = nest(d.transition, {ns, na, ns});
  json soj = json::array();
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t t = 0; t < ns; ++t)
        if (const auto* law = model.sojourn(s, a, t))
          soj.push_back({{"s", d.states[s]}, {"a", d.actions[a]}, {"s_next", d.states[t]},
                         {"dist", distribution_json(*law)}});
  j["sojourn"] = soj;
  if (!d.beta_observation.empty()) {
    json rows = json::array();
    for (const auto& b : d.beta_observation)
      rows.push_back({{"a", d.actions[b.action]}, {"phi", b.phi}, {"eta", b.eta}});
    j["observation_kernel"] = {{"beta", rows}};
  } else {
    j["observation_kernel"] = nest(d.observation_kernel, {na, ns, no});
  }
  if (d.initial_observation_kernel) j["g0"] = nest(*d.initial_observation_kernel, {ns, no});
  j["r1"] = nest(d.lump_reward, {ns, na});
  j["r2"] = nest(d.rate_reward, {ns, na, ns});
  j["beta"] = d.beta;
  j["initial_belief"] = d.initial_belief;
  if (d.mixed_observable)
    j["mixed_observable"] = {{"observable", d.mixed_observable->observable}, {"hidden", d.mixed_observable->hidden}};
  return j;
}

}  // namespace

PosmdpModel parse_model(std::string_view text) {
  const json doc = parse_text(text);
  ModelData data = model_data_from_json(doc);
  try {
    return PosmdpModel(std::move(data));
  } catch (const ModelError& e) {
    throw ParseError(e.what());
  }
}

PosmdpModel load_model(std::string_view text) {
  PosmdpModel model = parse_model(text);
  ValidationReport report = validate(model);
  if (!report.ok()) throw ValidationFailed(std::move(report));
  return model;
}

PosmdpModel load_model_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return load_model(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string dump_model(const PosmdpModel& model) { return render(model_json(model)); }

std::string model_hash(const PosmdpModel& model) {
  const std::string text = dump_model(model);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string dump_bank(const PosmdpModel& model, const SampleBank& bank) {
  const std::size_t ns = model.n_states();
  const std::size_t na = model.n_actions();
  json j;
  j["version"] = kFormatVersion;
  j["model_hash"] = model_hash(model);
  j["seed"] = bank.seed;
  json beliefs = json::array();
  for (const auto& b : bank.beliefs) beliefs.push_back(std::vector<double>(b.values().begin(), b.values().end()));
  j["beliefs"] = beliefs;
  json times = json::array();
  for (const auto& t : bank.times)
    times.push_back({{"tau", t.tau}, {"s", t.state}, {"a", t.action}, {"s_next", t.next_state}});
  j["times"] = times;
  json weights = json::array();
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t t = 0; t < ns; ++t) {
        const double w = bank.weights.at(model.sas(s, a, t));
        if (w != 0.0) weights.push_back({{"s", s}, {"a", a}, {"s_next", t}, {"w", w}});
      }
  j["weights"] = weights;
  return render(j);
}

SampleBank load_bank(const PosmdpModel& model, std::string_view text) {
  const json doc = parse_text(text);
  allow_keys(doc, "", {"version", "model_hash", "seed", "beliefs", "times", "weights"});
  if (count(field(doc, "", "version"), "/version") != static_cast<std::size_t>(kFormatVersion))
    fail("/version", "unsupported format version");
  const json& hash = field(doc, "", "model_hash");
  if (!hash.is_string() || hash.get<std::string>() != model_hash(model))
    fail("/model_hash", "sample bank was collected for a different model");

  const std::size_t ns = model.n_states();
  SampleBank bank;
  const json& seed = field(doc, "", "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) fail("/seed", "expected an integer");
  bank.seed = seed.get<std::uint64_t>();
  const json& beliefs = array(field(doc, "", "beliefs"), "/beliefs");
  for (std::size_t i = 0; i < beliefs.size(); ++i) {
    const std::string p = "/beliefs/" + std::to_string(i);
    try {
      bank.beliefs.emplace_back(dense(beliefs[i], p, {ns}));
    } catch (const std::invalid_argument& e) {
      fail(p, e.what());
    }
  }
  const auto& states = model.data().states;
  const auto& actions = model.data().actions;
  const json& times = array(field(doc, "", "times"), "/times");
  for (std::size_t i = 0; i < times.size(); ++i) {
    const std::string p = "/times/" + std::to_string(i);
    allow_keys(times[i], p, {"tau", "s", "a", "s_next"});
    const double tau = number(field(times[i], p, "tau"), p + "/tau");
    if (!(tau > 0.0)) fail(p + "/tau", "sojourn times must be > 0");
    bank.times.push_back({tau, resolve(field(times[i], p, "s"), p + "/s", states),
                          resolve(field(times[i], p, "a"), p + "/a", actions),
                          resolve(field(times[i], p, "s_next"), p + "/s_next", states)});
  }
  bank.weights.assign(ns * model.n_actions() * ns, 0.0);
  const json& weights = array(field(doc, "", "weights"), "/weights");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const std::string p = "/weights/" + std::to_string(i);
    allow_keys(weights[i], p, {"s", "a", "s_next", "w"});
    const std::size_t s = resolve(field(weights[i], p, "s"), p + "/s", states);
    const std::size_t a = resolve(field(weights[i], p, "a"), p + "/a", actions);
    const std::size_t t = resolve(field(weights[i], p, "s_next"), p + "/s_next", states);
    bank.weights[model.sas(s, a, t)] = number(field(weights[i], p, "w"), p + "/w");
  }
  return bank;
}

std::string dump_policy(const PosmdpModel& model, const Policy& policy) {
  json j;
  j["version"] = kFormatVersion;
  j["model_hash"] = policy.model_hash;
  j["converged"] = policy.converged;
  j["epsilon"] = policy.epsilon;
  json vectors = json::array();
  for (const auto& v : policy.value.vectors)
    vectors.push_back({{"action", model.data().actions.at(v.action)}, {"values", v.values}});
  j["vectors"] = vectors;
  json trace = json::array();
  for (const auto& r : policy.trace)
    trace.push_back({{"iteration", r.iteration},
                     {"vectors", r.vectors},
                     {"backups", r.backups},
                     {"residual", r.residual},
                     {"min_improvement", r.min_improvement}});
  j["trace"] = trace;
  return render(j);
}

Policy load_policy(const PosmdpModel& model, std::string_view text) {
  const json doc = parse_text(text);
  allow_keys(doc, "", {"version", "model_hash", "converged", "epsilon", "vectors", "trace"});
  if (count(field(doc, "", "version"), "/version") != static_cast<std::size_t>(kFormatVersion))
    fail("/version", "unsupported format version");
  Policy p;
  const json& hash = field(doc, "", "model_hash");
  if (!hash.is_string()) fail("/model_hash", "expected a string");
  p.model_hash = hash.get<std::string>();
  const json& conv = field(doc, "", "converged");
  if (!conv.is_boolean()) fail("/converged", "expected a boolean");
  p.converged = conv.get<bool>();
  p.epsilon = number(field(doc, "", "epsilon"), "/epsilon");
  const json& vectors = array(field(doc, "", "vectors"), "/vectors");
  if (vectors.empty()) fail("/vectors", "policy has no vectors");
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    const std::string path = "/vectors/" + std::to_string(k);
    allow_keys(vectors[k], path, {"action", "values"});
    AlphaVector alpha;
    alpha.action = resolve(field(vectors[k], path, "action"), path + "/action", model.data().actions);
    alpha.values = dense(field(vectors[k], path, "values"), path + "/values", {model.n_states()});
    p.value.vectors.push_back(std::move(alpha));
  }
  const json& trace = array(field(doc, "", "trace"), "/trace");
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const std::string path = "/trace/" + std::to_string(k);
    allow_keys(trace[k], path, {"iteration", "vectors", "backups", "residual", "min_improvement"});
    IterationRecord r;
    r.iteration = count(field(trace[k], path, "iteration"), path + "/iteration");
    r.vectors = count(field(trace[k], path, "vectors"), path + "/vectors");
    r.backups = count(field(trace[k], path, "backups"), path + "/backups");
    r.residual = number(field(trace[k], path, "residual"), path + "/residual");
    const json& mi = field(trace[k], path, "min_improvement");
    r.min_improvement = mi.is_null() ? std::numeric_limits<double>::infinity() : number(mi, path + "/min_improvement");
    p.trace.push_back(r);
  }
  return p;
}

void check_policy_matches(const PosmdpModel& model, const Policy& policy) {
  const std::string expected = model_hash(model);
  if (policy.model_hash != expected)
    throw ParseError("policy was computed for model " + policy.model_hash + ", not " + expected);
}

}  // namespace chronos
