#include "wlab/json_io.hpp"

#include <stdexcept>

namespace wlab {

namespace {

json complex_vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back({v(i).real(), v(i).imag()});
  return arr;
}

Vector complex_vector_from_json(const json& arr) {
  Vector v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = Complex(arr[i][0].get<double>(), arr[i][1].get<double>());
  return v;
}

SpaceSignature signature_from_json(const json& j) {
  return SpaceSignature::create(j.at("N").get<int>(), j.at("M").get<int>());
}

}  // namespace

json to_json(const StateVector& psi) {
  return json{{"N", psi.sig().N}, {"M", psi.sig().M}, {"coeffs", complex_vector_to_json(psi.coeffs())}};
}

StateVector state_from_json(const json& j) {
  return StateVector(signature_from_json(j), complex_vector_from_json(j.at("coeffs")));
}

json to_json(const DensityOperator& rho) {
  json spectral = json::array();
  for (const auto& term : rho.spectral())
    spectral.push_back(json{{"p", term.p}, {"psi", complex_vector_to_json(term.psi.coeffs())}});
  return json{{"N", rho.sig().N}, {"M", rho.sig().M}, {"spectral", spectral}};
}

DensityOperator density_from_json(const json& j) {
  const SpaceSignature sig = signature_from_json(j);
  std::vector<SpectralTerm> terms;
  for (const auto& t : j.at("spectral"))
    terms.push_back({t.at("p").get<double>(),
                     StateVector(sig, complex_vector_from_json(t.at("psi")))});
  return DensityOperator::from_spectral(sig, std::move(terms));
}

json to_json(const ChartPolynomial& F) {
  json terms = json::array();
  for (const auto& [beta, coeff] : F.terms())
    terms.push_back(json{{"beta", beta}, {"re", coeff.real()}, {"im", coeff.imag()}});
  return json{{"N", F.sig().N}, {"M", F.sig().M}, {"terms", terms}};
}

ChartPolynomial polynomial_from_json(const json& j) {
  const SpaceSignature sig = signature_from_json(j);
  std::vector<ChartPolynomial::Term> terms;
  for (const auto& t : j.at("terms"))
    terms.emplace_back(t.at("beta").get<MultiIndex>(),
                       Complex(t.at("re").get<double>(), t.at("im").get<double>()));
  return ChartPolynomial(sig, std::move(terms));
}

json to_json(const QuadratureResult& q) {
  return json{{"value", q.value}, {"error_estimate", q.error_estimate}, {"n_evals", q.n_evals}};
}

json to_json(const StabilityReport& rep) {
  return json{{"N", rep.N},
              {"M", rep.M},
              {"phi", rep.phi},
              {"seed", rep.seed},
              {"n_samples", rep.n_samples},
              {"T", rep.T},
              {"D", rep.D},
              {"deficit", rep.deficit},
              {"mc_error", rep.mc_error},
              {"lower_bound", rep.lower_bound},
              {"ratio", rep.ratio},
              {"pass", rep.pass}};
}

json to_json(const ConcentrationReport& rep, const StabilityReport* stability) {
  json j = stability ? to_json(*stability) : json::object();
  j["region"] = rep.region;
  j["mass"] = rep.mass;
  j["bound"] = rep.bound;
  j["nu"] = rep.nu;
  j["mc_error"] = rep.mc_error;
  j["pass"] = rep.pass;
  return j;
}

}  // namespace wlab
