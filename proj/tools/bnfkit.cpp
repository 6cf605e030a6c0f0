// Command-line workbench for the normal-form / resonance pipeline.
//
// Exit codes: 0 success, 2 mathematical precondition failure (resonance,
// labeling collision, ...), 3 input validation, 4 numerical failure or
// resource guard.

#include <complex>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <birkhoff/birkhoff.hpp>
#include <birkhoff/version.hpp>

namespace {

using birkhoff::Json;

Json make_manifest(const std::string& command, const std::vector<std::string>& inputs,
                   const Json& params, const std::vector<std::string>& outputs) {
  return {{"command", command},
          {"version", birkhoff::kVersion},
          {"inputs", inputs},
          {"params", params},
          {"outputs", outputs}};
}

std::string witness_str(const std::vector<long long>& m) {
  std::string s = "(";
  for (std::size_t i = 0; i < m.size(); ++i) s += (i ? ", " : "") + std::to_string(m[i]);
  return s + ")";
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) {
      if (start < s.size()) out.push_back(s.substr(start));
      break;
    }
    if (comma > start) out.push_back(s.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

struct BnfArgs {
  std::string spec_path;
  std::string out_path = "normalform.json";
  int order = 3;
  std::string mode = "exact";
  double eps = 1e-9;
};

template <class S>
void run_bnf_mode(const BnfArgs& a, const Json& params) {
  auto spec = birkhoff::spec_from_json<S>(birkhoff::read_json_file(a.spec_path));
  auto [nf, chain] = birkhoff::bnf_from_spec(spec, a.order, a.eps);
  auto unscaled = birkhoff::unscale_normal_form(nf);
  Json out = {{"manifest", make_manifest("bnf", {a.spec_path}, params, {a.out_path})},
              {"scaled", birkhoff::normal_form_to_json(nf)},
              {"unscaled", birkhoff::normal_form_to_json(unscaled)},
              {"chain", birkhoff::chain_to_json(chain)}};
  birkhoff::write_json_file(a.out_path, out);
  std::cout << "normal form through action degree " << a.order << " -> " << a.out_path << "\n";
  for (int N = 2; N <= a.order; ++N)
    std::cout << "  h_" << N << " = " << nf.action(N).str() << "\n";
}

void run_bnf(const BnfArgs& a) {
  const Json params = {{"order", a.order}, {"mode", a.mode}, {"eps", a.eps}};
  if (a.mode == "exact")
    run_bnf_mode<birkhoff::Rational>(a, params);
  else if (a.mode == "float")
    run_bnf_mode<double>(a, params);
  else
    throw birkhoff::ValidationError("mode must be 'exact' or 'float'");
}

struct ResArgs {
  std::string nf_path;
  std::string h_list;
  std::string out_prefix = "resonances";
  int kmax = 5;
};

birkhoff::NormalForm<std::complex<double>> load_normal_form(const std::string& path) {
  Json j = birkhoff::read_json_file(path);
  const Json& nfj = j.count("scaled") ? j.at("scaled") : j;
  return birkhoff::normal_form_from_json<std::complex<double>>(nfj);
}

void run_resonances(const ResArgs& a) {
  const auto tokens = split_commas(a.h_list);
  if (tokens.empty()) throw birkhoff::ValidationError("resonances: empty h list");
  auto nf = load_normal_form(a.nf_path);
  const Json params = {{"h", tokens}, {"kmax", a.kmax}};
  for (const auto& tok : tokens) {
    double h = 0.0;
    try {
      h = std::stod(tok);
    } catch (const std::exception&) {
      throw birkhoff::ValidationError("resonances: bad h value '" + tok + "'");
    }
    auto list = birkhoff::generate_resonances(nf, h, a.kmax);
    const std::string out_path = a.out_prefix + "_h" + tok + ".json";
    Json out = birkhoff::resonances_to_json(list);
    out["manifest"] = make_manifest("resonances", {a.nf_path}, params, {out_path});
    birkhoff::write_json_file(out_path, out);
    std::cout << list.values.size() << " values at h=" << tok << " (implied delta "
              << birkhoff::implied_delta(h, a.kmax) << ") -> " << out_path << "\n";
  }
}

struct InvertArgs {
  std::vector<std::string> inputs;
  std::string out_path = "recovered_spec.json";
  std::string report_path = "fit_report.json";
  int order = 2;
  double tol_factor = 1.0;
  double eps = 1e-9;
  double realness_tol = 0.05;
  int guard = 1;
};

void run_invert(const InvertArgs& a) {
  std::vector<birkhoff::ResonanceList> lists;
  for (const auto& p : a.inputs)
    lists.push_back(birkhoff::resonances_from_json(birkhoff::read_json_file(p)));
  birkhoff::InvertOptions opt;
  opt.tol_factor = a.tol_factor;
  opt.eps = a.eps;
  opt.realness_tol = a.realness_tol;
  opt.guard_degrees = a.guard;
  auto res = birkhoff::invert_from_resonances(lists, a.order, opt);

  const Json params = {{"order", a.order},     {"tol_factor", a.tol_factor},
                       {"eps", a.eps},         {"realness_tol", a.realness_tol},
                       {"guard", a.guard}};
  Json spec_json = birkhoff::spec_to_json(res.spec);
  spec_json["manifest"] = make_manifest("invert", a.inputs, params, {a.out_path, a.report_path});
  birkhoff::write_json_file(a.out_path, spec_json);
  Json report_json = birkhoff::fit_report_to_json(res.report);
  report_json["manifest"] = make_manifest("invert", a.inputs, params, {a.out_path, a.report_path});
  birkhoff::write_json_file(a.report_path, report_json);

  std::cout << "estimated E0 = " << res.structure.E0 << ", d = " << res.structure.d << ", u = (";
  for (std::size_t j = 0; j < res.structure.u.size(); ++j)
    std::cout << (j ? ", " : "") << res.structure.u[j];
  std::cout << ")\n";
  std::cout << "fit residual norm " << res.report.residual_norm << ", condition "
            << res.report.condition << ", unmatched values " << res.unmatched_count << "\n";
  for (const auto& [alpha, c] : res.spec.coeffs)
    std::cout << "  c_" << alpha.str() << " = " << c << "\n";
  std::cout << "-> " << a.out_path << ", " << a.report_path << "\n";
}

struct OracleArgs {
  std::string spec_path;
  std::string out_path = "oracle_resonances.json";
  double h = 0.01;
  int basis = 64;
  int basis_increment = 8;
  double re_halfwidth = 1.0;
  double im_depth = 1.0;
  double stability_tol = 1e-8;
};

void run_oracle(const OracleArgs& a) {
  auto spec = birkhoff::spec_from_json<double>(birkhoff::read_json_file(a.spec_path));
  birkhoff::OracleConfig cfg;
  cfg.h = a.h;
  cfg.basis = a.basis;
  cfg.basis_increment = a.basis_increment;
  cfg.re_halfwidth = a.re_halfwidth;
  cfg.im_depth = a.im_depth;
  cfg.stability_tol = a.stability_tol;
  auto list = birkhoff::oracle_resonances(spec, cfg);
  const Json params = {{"h", a.h},
                       {"basis", a.basis},
                       {"basis_increment", a.basis_increment},
                       {"re_halfwidth", a.re_halfwidth},
                       {"im_depth", a.im_depth},
                       {"stability_tol", a.stability_tol}};
  Json out = birkhoff::resonances_to_json(list);
  out["manifest"] = make_manifest("oracle", {a.spec_path}, params, {a.out_path});
  birkhoff::write_json_file(a.out_path, out);
  std::cout << list.values.size() << " stable values at h=" << a.h << " -> " << a.out_path << "\n";
  if (list.values.empty()) std::cout << "  (no stable eigenvalue in the window)\n";
}

struct RoundtripArgs {
  std::string spec_path;
  std::string out_path;  // empty: stdout only
  int order = 3;
  std::string mode = "exact";
  double eps = 1e-9;
  double tol = 1e-9;
};

template <class S>
Json run_roundtrip_mode(const RoundtripArgs& a, double& max_diff) {
  auto spec = birkhoff::spec_from_json<S>(birkhoff::read_json_file(a.spec_path));
  auto [nf, chain] = birkhoff::bnf_from_spec(spec, a.order, a.eps);
  auto rec = birkhoff::recover_taylor(nf, a.order, birkhoff::RecoverOptions{a.eps, 1e-6});

  Json entries = Json::array();
  max_diff = 0.0;
  std::map<birkhoff::MultiIndex, std::pair<S, S>, birkhoff::GradedLex> joined;
  for (const auto& [alpha, c] : spec.coeffs)
    if (alpha.degree() <= a.order) joined[alpha].first = c;
  for (const auto& [alpha, c] : rec.coeffs) joined[alpha].second = c;
  for (const auto& [alpha, pr] : joined) {
    const S diff = pr.first - pr.second;
    double mag;
    if constexpr (std::is_same_v<S, birkhoff::Rational>)
      mag = std::abs(birkhoff::rational_to_double(diff));
    else
      mag = std::abs(diff);
    max_diff = std::max(max_diff, mag);
    entries.push_back({{"alpha", alpha.exponents()},
                       {"original", birkhoff::detail::scalar_to_json(pr.first)},
                       {"recovered", birkhoff::detail::scalar_to_json(pr.second)},
                       {"diff", birkhoff::detail::scalar_to_json(diff)}});
  }
  return {{"order", a.order}, {"mode", a.mode}, {"max_abs_diff", max_diff}, {"entries", entries}};
}

void run_roundtrip(const RoundtripArgs& a) {
  double max_diff = 0.0;
  Json report;
  const Json params = {{"order", a.order}, {"mode", a.mode}, {"eps", a.eps}, {"tol", a.tol}};
  if (a.mode == "exact")
    report = run_roundtrip_mode<birkhoff::Rational>(a, max_diff);
  else if (a.mode == "float")
    report = run_roundtrip_mode<double>(a, max_diff);
  else
    throw birkhoff::ValidationError("mode must be 'exact' or 'float'");
  report["manifest"] = make_manifest("roundtrip", {a.spec_path}, params,
                                     a.out_path.empty() ? std::vector<std::string>{}
                                                        : std::vector<std::string>{a.out_path});
  if (!a.out_path.empty()) birkhoff::write_json_file(a.out_path, report);
  std::cout << report.dump(2) << "\n";
  const double tol = a.mode == "exact" ? 0.0 : a.tol;
  if (max_diff > tol)
    throw birkhoff::NumericalError("roundtrip: coefficient difference above tolerance");
  std::cout << "roundtrip ok (max diff " << max_diff << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Birkhoff normal form / resonance lattice workbench"};
  app.set_help_flag("--help", "print this help and exit");  // keep --h free
  app.set_version_flag("--version", birkhoff::kVersion);
  app.require_subcommand(1);
  auto add_sub = [&app](const std::string& name, const std::string& desc) {
    auto* sub = app.add_subcommand(name, desc);
    sub->set_help_flag("--help", "print this help and exit");
    return sub;
  };

  BnfArgs ba;
  auto* bnf = add_sub("bnf", "normal form of a potential spec");
  bnf->add_option("spec", ba.spec_path, "potential spec JSON")->required();
  bnf->add_option("--order", ba.order, "highest action degree (>= 2)")->capture_default_str();
  bnf->add_option("--mode", ba.mode, "exact | float")->capture_default_str();
  bnf->add_option("--eps", ba.eps, "small-divisor tolerance (float mode)")->capture_default_str();
  bnf->add_option("-o,--out", ba.out_path, "output file")->capture_default_str();
  bnf->callback([&ba]() { run_bnf(ba); });

  ResArgs ra;
  auto* res = add_sub("resonances", "resonance lattice of a normal form");
  res->add_option("normalform", ra.nf_path, "normal form JSON (bnf output or bare)")->required();
  res->add_option("--h", ra.h_list, "comma-separated h values")->required();
  res->add_option("--kmax", ra.kmax, "max k per coordinate")->capture_default_str();
  res->add_option("--out-prefix", ra.out_prefix, "output file prefix")->capture_default_str();
  res->callback([&ra]() { run_resonances(ra); });

  InvertArgs ia;
  auto* inv = add_sub("invert", "recover a potential spec from resonance lists");
  inv->add_option("lists", ia.inputs, "resonance list JSON files (>= 2 distinct h)")->required();
  inv->add_option("--order", ia.order, "target Taylor order (|alpha| <= order)")
      ->capture_default_str();
  inv->add_option("--tol-factor", ia.tol_factor, "labeling radius factor")->capture_default_str();
  inv->add_option("--eps", ia.eps, "small-divisor tolerance")->capture_default_str();
  inv->add_option("--realness-tol", ia.realness_tol, "max relative imaginary residue")
      ->capture_default_str();
  inv->add_option("--guard", ia.guard, "extra fitted degrees beyond order")->capture_default_str();
  inv->add_option("-o,--out", ia.out_path, "recovered spec file")->capture_default_str();
  inv->add_option("--report", ia.report_path, "fit report file")->capture_default_str();
  inv->callback([&ia]() { run_invert(ia); });

  OracleArgs oa;
  auto* ora = add_sub("oracle", "resonances by complex-scaled diagonalization (n <= 2)");
  ora->add_option("spec", oa.spec_path, "potential spec JSON")->required();
  ora->add_option("--h", oa.h, "semiclassical parameter")->required();
  ora->add_option("--basis", oa.basis, "ladder basis size per coordinate")->capture_default_str();
  ora->add_option("--basis-increment", oa.basis_increment, "stability sweep step")
      ->capture_default_str();
  ora->add_option("--re-halfwidth", oa.re_halfwidth, "Re window around E0")->capture_default_str();
  ora->add_option("--im-depth", oa.im_depth, "Im window depth")->capture_default_str();
  ora->add_option("--stability-tol", oa.stability_tol, "eigenvalue stability tolerance")
      ->capture_default_str();
  ora->add_option("-o,--out", oa.out_path, "output file")->capture_default_str();
  ora->callback([&oa]() { run_oracle(oa); });

  RoundtripArgs ta;
  auto* rt = add_sub("roundtrip", "spec -> normal form -> recovered spec diff");
  rt->add_option("spec", ta.spec_path, "potential spec JSON")->required();
  rt->add_option("--order", ta.order, "action degree / Taylor order")->capture_default_str();
  rt->add_option("--mode", ta.mode, "exact | float")->capture_default_str();
  rt->add_option("--eps", ta.eps, "small-divisor tolerance")->capture_default_str();
  rt->add_option("--tol", ta.tol, "max allowed |diff| in float mode")->capture_default_str();
  rt->add_option("-o,--out", ta.out_path, "also write the diff report here");
  rt->callback([&ta]() { run_roundtrip(ta); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  } catch (const birkhoff::ResonanceError& e) {
    std::cerr << "error: " << e.what() << "; witness m = " << witness_str(e.witness) << "\n";
    return 2;
  } catch (const birkhoff::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const birkhoff::MathError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const birkhoff::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const birkhoff::LimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
