#include "cpd/scenario_config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "cpd/error.hpp"

namespace cpd {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::invalid_config, key + ": " + why);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) bad(where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.contains(key)) bad(where.empty() ? key : where + "." + key, "unknown key");
  }
}

double number(const json& v, const std::string& key) {
  if (!v.is_number()) bad(key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad(key, "must be finite");
  return d;
}

double positive(const json& v, const std::string& key) {
  const double d = number(v, key);
  if (d <= 0.0) bad(key, "must be positive");
  return d;
}

long integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) bad(key, "expected an integer");
  return v.get<long>();
}

bool boolean(const json& v, const std::string& key) {
  if (!v.is_boolean()) bad(key, "expected true or false");
  return v.get<bool>();
}

std::string text(const json& v, const std::string& key) {
  if (!v.is_string()) bad(key, "expected a string");
  return v.get<std::string>();
}

Vec3 coords(const json& v, const std::string& key, int dim) {
  if (!v.is_array() || (v.size() != 2 && v.size() != 3)) bad(key, "expected 2 or 3 coordinates");
  if (static_cast<int>(v.size()) < dim) bad(key, "needs " + std::to_string(dim) + " coordinates");
  Vec3 p = Vec3::Zero();
  for (std::size_t k = 0; k < v.size(); ++k) p[static_cast<Eigen::Index>(k)] = number(v[k], key);
  if (dim == 2 && p.z() != 0.0) bad(key, "third coordinate must be 0 in 2D");
  return p;
}

Box box(const json& v, const std::string& key, int dim) {
  only_keys(v, key, {"lo", "hi"});
  if (!v.contains("lo") || !v.contains("hi")) bad(key, "needs lo and hi");
  Box b{coords(v["lo"], key + ".lo", dim), coords(v["hi"], key + ".hi", dim)};
  for (int k = 0; k < dim; ++k) {
    if (!(b.lo[k] < b.hi[k])) bad(key, "lo must be below hi on every axis");
  }
  return b;
}

int axis_of(const json& v, const std::string& key, int dim) {
  int axis = -1;
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "x") axis = 0;
    else if (s == "y") axis = 1;
    else if (s == "z") axis = 2;
    else bad(key, "expected x, y or z");
  } else {
    axis = static_cast<int>(integer(v, key));
  }
  if (axis < 0 || axis >= dim) bad(key, "axis out of range for dim " + std::to_string(dim));
  return axis;
}

template <class Enum>
Enum choice(const json& v, const std::string& key, std::initializer_list<std::pair<const char*, Enum>> options) {
  const std::string s = text(v, key);
  std::string list;
  for (const auto& [name, value] : options) {
    if (s == name) return value;
    list += list.empty() ? name : std::string(", ") + name;
  }
  bad(key, "expected one of " + list);
}

const char* axis_name(int axis) { return axis == 0 ? "x" : axis == 1 ? "y" : "z"; }

json vec_json(const Vec3& p, int dim) {
  json a = json::array();
  for (int k = 0; k < dim; ++k) a.push_back(p[k]);
  return a;
}

}  // namespace

ScenarioConfig parse_scenario_config(const json& doc, const std::filesystem::path& base_dir) {
  only_keys(doc, "", {"name", "dim", "domain", "holes", "spacing", "point_cloud", "horizon", "horizon_ratio",
                      "material", "interactions", "assembly", "enumeration", "load", "solver", "outputs", "seed"});
  ScenarioConfig c;
  if (doc.contains("name")) c.name = text(doc["name"], "name");
  if (!doc.contains("dim")) bad("dim", "required");
  c.dim = static_cast<int>(integer(doc["dim"], "dim"));
  if (c.dim != 2 && c.dim != 3) bad("dim", "must be 2 or 3");

  if (doc.contains("point_cloud")) {
    std::filesystem::path p = text(doc["point_cloud"], "point_cloud");
    c.point_cloud = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  if (doc.contains("domain")) {
    c.domain = box(doc["domain"], "domain", c.dim);
  } else if (!c.point_cloud) {
    bad("domain", "required unless point_cloud is given");
  }
  if (doc.contains("holes")) {
    if (!doc["holes"].is_array()) bad("holes", "expected an array");
    for (std::size_t h = 0; h < doc["holes"].size(); ++h) {
      c.holes.push_back(box(doc["holes"][h], "holes[" + std::to_string(h) + "]", c.dim));
    }
  }
  if (doc.contains("spacing")) {
    c.spacing = positive(doc["spacing"], "spacing");
  } else if (!c.point_cloud) {
    bad("spacing", "required unless point_cloud is given");
  }

  const bool has_h = doc.contains("horizon");
  const bool has_r = doc.contains("horizon_ratio");
  if (has_h == has_r) bad("horizon", "give exactly one of horizon and horizon_ratio");
  if (has_h) {
    c.horizon = positive(doc["horizon"], "horizon");
  } else {
    if (c.spacing <= 0.0) bad("horizon_ratio", "needs spacing");
    c.horizon_ratio = positive(doc["horizon_ratio"], "horizon_ratio");
    c.horizon = *c.horizon_ratio * c.spacing;
  }
  if (c.spacing > 0.0 && c.horizon < 2.0 * c.spacing) {
    std::ostringstream w;
    w << "horizon/spacing = " << c.horizon / c.spacing << " is below 2; neighbourhoods are sparse";
    c.warnings.push_back(w.str());
  }

  if (doc.contains("material")) {
    const json& m = doc["material"];
    only_keys(m, "material", {"C1", "C2", "C3"});
    if (m.contains("C1")) c.material.c1 = number(m["C1"], "material.C1");
    if (m.contains("C2")) c.material.c2 = number(m["C2"], "material.C2");
    if (m.contains("C3")) c.material.c3 = number(m["C3"], "material.C3");
  }
  c.material.horizon = c.horizon;

  c.material.enabled = InteractionFlags{true, false, false};
  if (doc.contains("interactions")) {
    const json& v = doc["interactions"];
    if (!v.is_array() || v.empty()) bad("interactions", "expected a non-empty array");
    InteractionFlags f{false, false, false};
    for (const auto& e : v) {
      const std::string s = text(e, "interactions");
      if (s == "one") f.one = true;
      else if (s == "two") f.two = true;
      else if (s == "three") f.three = true;
      else bad("interactions", "expected one, two or three");
    }
    c.material.enabled = f;
  }
  if (!c.material.enabled.one) bad("interactions", "the one-neighbour interaction is required");
  if (c.dim == 2 && c.material.enabled.three) bad("interactions", "three-neighbour interactions need dim 3");
  if (c.material.c2 != 0.0 && !c.material.enabled.two) c.warnings.push_back("C2 is set but two is not enabled");
  if (c.material.c3 != 0.0 && !c.material.enabled.three) c.warnings.push_back("C3 is set but three is not enabled");
  try {
    c.material.validate();
  } catch (const Error& e) {
    bad("material", e.detail());
  }

  if (doc.contains("assembly")) {
    c.assembly.mode = choice<AssemblyMode>(doc["assembly"], "assembly",
                                           {{"variational", AssemblyMode::variational},
                                            {"collocation", AssemblyMode::collocation}});
  }
  if (doc.contains("enumeration")) {
    c.assembly.enumeration = choice<Enumeration>(doc["enumeration"], "enumeration",
                                                 {{"unordered", Enumeration::unordered},
                                                  {"ordered", Enumeration::ordered}});
  }

  if (doc.contains("load")) {
    const json& l = doc["load"];
    only_keys(l, "load", {"faces", "extension", "increments", "style", "lateral", "layer_thickness"});
    if (l.contains("faces")) c.extension.axis = axis_of(l["faces"], "load.faces", c.dim);
    if (l.contains("extension")) {
      c.extension.extension = number(l["extension"], "load.extension");
      if (c.extension.extension <= -1.0) bad("load.extension", "must exceed -1");
    }
    if (l.contains("increments")) {
      const long n = integer(l["increments"], "load.increments");
      if (n < 1) bad("load.increments", "must be at least 1");
      c.increments = static_cast<int>(n);
    }
    if (l.contains("style")) {
      c.extension.style = choice<LoadStyle>(l["style"], "load.style",
                                            {{"translate", LoadStyle::translate}, {"affine", LoadStyle::affine}});
    }
    if (l.contains("lateral")) {
      c.extension.lateral = choice<LateralMode>(l["lateral"], "load.lateral",
                                                {{"free", LateralMode::free}, {"clamped", LateralMode::clamped}});
    }
    if (l.contains("layer_thickness")) c.layer_thickness = positive(l["layer_thickness"], "load.layer_thickness");
  }

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    only_keys(s, "solver", {"tolerance", "max_iterations", "bisection"});
    if (s.contains("tolerance")) c.tolerance = positive(s["tolerance"], "solver.tolerance");
    if (s.contains("max_iterations")) {
      const long n = integer(s["max_iterations"], "solver.max_iterations");
      if (n < 1) bad("solver.max_iterations", "must be at least 1");
      c.max_iterations = static_cast<int>(n);
    }
    if (s.contains("bisection")) c.bisection = boolean(s["bisection"], "solver.bisection");
  }

  if (doc.contains("outputs")) {
    const json& o = doc["outputs"];
    only_keys(o, "outputs",
              {"snapshots", "vtk", "newton_log", "sparsity", "quadrature_report", "probes", "poisson_probe"});
    if (o.contains("snapshots")) {
      c.snapshots = choice<SnapshotMode>(o["snapshots"], "outputs.snapshots",
                                         {{"final", SnapshotMode::final},
                                          {"all", SnapshotMode::all},
                                          {"none", SnapshotMode::none}});
    }
    if (o.contains("vtk")) c.vtk = boolean(o["vtk"], "outputs.vtk");
    if (o.contains("newton_log")) c.newton_log = boolean(o["newton_log"], "outputs.newton_log");
    if (o.contains("sparsity")) c.sparsity = boolean(o["sparsity"], "outputs.sparsity");
    if (o.contains("quadrature_report")) {
      c.quadrature_report = boolean(o["quadrature_report"], "outputs.quadrature_report");
    }
    if (o.contains("poisson_probe")) {
      c.poisson_probe = choice<PoissonProbe>(o["poisson_probe"], "outputs.poisson_probe",
                                             {{"centre", PoissonProbe::centre}, {"faces", PoissonProbe::faces}});
    }
    if (o.contains("probes")) {
      const json& p = o["probes"];
      only_keys(p, "outputs.probes", {"points", "lines"});
      std::set<std::string> names;
      auto unique_name = [&](const json& e, const std::string& key) {
        if (!e.contains("name")) bad(key, "needs a name");
        std::string n = text(e["name"], key + ".name");
        if (n.empty() || n.find_first_of("/\\ ,") != std::string::npos) bad(key + ".name", "must be a plain token");
        if (!names.insert(n).second) bad(key + ".name", "duplicate probe name " + n);
        return n;
      };
      if (p.contains("points")) {
        if (!p["points"].is_array()) bad("outputs.probes.points", "expected an array");
        for (std::size_t i = 0; i < p["points"].size(); ++i) {
          const json& e = p["points"][i];
          const std::string key = "outputs.probes.points[" + std::to_string(i) + "]";
          only_keys(e, key, {"name", "at"});
          if (!e.contains("at")) bad(key, "needs at");
          c.probe_points.push_back({unique_name(e, key), coords(e["at"], key + ".at", c.dim)});
        }
      }
      if (p.contains("lines")) {
        if (!p["lines"].is_array()) bad("outputs.probes.lines", "expected an array");
        for (std::size_t i = 0; i < p["lines"].size(); ++i) {
          const json& e = p["lines"][i];
          const std::string key = "outputs.probes.lines[" + std::to_string(i) + "]";
          only_keys(e, key, {"name", "axis", "through"});
          if (!e.contains("axis") || !e.contains("through")) bad(key, "needs axis and through");
          ProbeLineSpec line;
          line.name = unique_name(e, key);
          line.axis = axis_of(e["axis"], key + ".axis", c.dim);
          line.through = coords(e["through"], key + ".through", c.dim);
          c.probe_lines.push_back(line);
        }
      }
    }
  }

  if (doc.contains("seed")) {
    const long s = integer(doc["seed"], "seed");
    if (s < 0) bad("seed", "must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  return c;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::invalid_config, path.string() + ": " + e.what());
  }
  return parse_scenario_config(doc, path.parent_path());
}

json ScenarioConfig::to_json() const {
  json j;
  j["name"] = name;
  j["dim"] = dim;
  if (!point_cloud) {
    j["domain"] = {{"lo", vec_json(domain.lo, dim)}, {"hi", vec_json(domain.hi, dim)}};
    json hs = json::array();
    for (const Box& h : holes) hs.push_back({{"lo", vec_json(h.lo, dim)}, {"hi", vec_json(h.hi, dim)}});
    j["holes"] = hs;
  } else {
    j["point_cloud"] = point_cloud->string();
  }
  if (spacing > 0.0) j["spacing"] = spacing;
  if (horizon_ratio) j["horizon_ratio"] = *horizon_ratio;
  else j["horizon"] = horizon;
  j["material"] = {{"C1", material.c1}, {"C2", material.c2}, {"C3", material.c3}};
  json in = json::array();
  if (material.enabled.one) in.push_back("one");
  if (material.enabled.two) in.push_back("two");
  if (material.enabled.three) in.push_back("three");
  j["interactions"] = in;
  j["assembly"] = std::string(to_string(assembly.mode));
  j["enumeration"] = assembly.enumeration == Enumeration::ordered ? "ordered" : "unordered";
  j["load"] = {{"faces", axis_name(extension.axis)},
               {"extension", extension.extension},
               {"increments", increments},
               {"style", extension.style == LoadStyle::affine ? "affine" : "translate"},
               {"lateral", extension.lateral == LateralMode::free ? "free" : "clamped"}};
  if (layer_thickness) j["load"]["layer_thickness"] = *layer_thickness;
  j["solver"] = {{"tolerance", tolerance}, {"max_iterations", max_iterations}, {"bisection", bisection}};
  json pts = json::array();
  for (const auto& p : probe_points) pts.push_back({{"name", p.name}, {"at", vec_json(p.at, dim)}});
  json lines = json::array();
  for (const auto& l : probe_lines) {
    lines.push_back({{"name", l.name}, {"axis", axis_name(l.axis)}, {"through", vec_json(l.through, dim)}});
  }
  j["outputs"] = {{"snapshots", snapshots == SnapshotMode::all ? "all" : snapshots == SnapshotMode::none ? "none" : "final"},
                  {"vtk", vtk},
                  {"newton_log", newton_log},
                  {"sparsity", sparsity},
                  {"quadrature_report", quadrature_report},
                  {"poisson_probe", poisson_probe == PoissonProbe::centre ? "centre" : "faces"},
                  {"probes", {{"points", pts}, {"lines", lines}}}};
  j["seed"] = seed;
  return j;
}

}  // namespace cpd
