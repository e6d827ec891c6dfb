#include "lqdim/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "lqdim/conditions.hpp"
#include "lqdim/dimension.hpp"
#include "lqdim/empirical.hpp"
#include "lqdim/fixtures.hpp"
#include "lqdim/io.hpp"
#include "lqdim/parallel.hpp"
#include "lqdim/projective.hpp"

namespace lqdim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Non-finite values become strings so JSON stays valid.
ordered_json num(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

ordered_json threshold_json(const Threshold& t) {
  ordered_json j;
  j["kind"] = t.kind() == Threshold::Kind::Finite ? "finite" : t.kind() == Threshold::Kind::Infinite ? "infinite"
                                                                                                      : "none_below_2";
  j["value"] = t.kind() == Threshold::Kind::NoneBelow2 ? ordered_json(nullptr) : num(t.value());
  j["display"] = t.to_string();
  return j;
}

ordered_json dimension_json(const DimensionEstimate& e) {
  return {{"value", e.value},         {"depth", e.depth},
          {"bracket_lo", e.lower_heuristic}, {"bracket_hi", e.upper_certified},
          {"tolerance", e.tolerance}, {"converged", e.converged}};
}

std::string fmt(double x, const char* spec = "%.6f") {
  if (!std::isfinite(x)) return format_double(x);
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::size_t level_depth(const RunConfig& c) { return c.params.depth.value_or(default_depth(c.maps.size())); }

WeightChoice weight_choice(const RunConfig& c) {
  return c.params.weights.value_or(c.probabilities ? WeightChoice::Bernoulli : WeightChoice::Kaenmaki);
}

std::vector<double> bernoulli_vector(const RunConfig& c) {
  if (c.probabilities) return *c.probabilities;
  return std::vector<double>(c.maps.size(), 1.0 / static_cast<double>(c.maps.size()));
}

/// Weights for the estimators; the Käenmäki surrogate renormalizes per level on its own.
WeightModel estimator_weights(const RunConfig& c, const Ifs& ifs, double d) {
  if (weight_choice(c) == WeightChoice::Bernoulli) return bernoulli_weights(bernoulli_vector(c));
  return kaenmaki_weights(ifs, d, 1, c.params.budget);
}

std::vector<double> schedule(const RunConfig& c) {
  if (!c.params.deltas.empty()) return c.params.deltas;
  std::vector<double> out;
  for (int e = 3; e <= 8; ++e) out.push_back(std::ldexp(1.0, -e));
  return out;
}

void emit(const std::string& text, const std::string& file, const CommandOptions& opts, std::ostream& out) {
  if (opts.out_dir.empty()) {
    out << text;
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(opts.out_dir, ec);
  if (ec) throw OutputError(opts.out_dir + ": " + ec.message());
  write_text((std::filesystem::path(opts.out_dir) / file).string(), text);
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kUsage;
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kResource;
  } catch (const EstimationError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kData;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kIo;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return exit_code::kSoftware;
  }
}

}  // namespace

int cmd_check(const RunConfig& c, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    set_workers(c.params.workers);
    const Ifs ifs = c.system();
    const Params& p = c.params;
    const std::size_t k = level_depth(c);

    ConditionReport r;
    r.positivity = check_positivity(ifs);
    r.dimension = affinity_dim(ifs, k, p.tol, p.budget);
    const double d = r.dimension.value;
    r.separation = check_separation(ifs, p.separation_depth, p.budget);
    if (r.dimension.upper_certified <= 1.0)
      r.d_at_most_one = Verdict::Holds;
    else if (r.dimension.lower_heuristic > 1.0)
      r.d_at_most_one = Verdict::Fails;

    bool gamma_complete = true;
    std::optional<double> d2;
    if (r.positivity) {
      try {
        r.gamma = gamma_bound(ifs, p.gamma_depth, p.budget);
      } catch (const GammaBudgetError& e) {
        r.gamma = e.partial;
        gamma_complete = false;
        err << "note: " << e.what() << '\n';
      }
      r.projectively_separated = projective_separation(ifs).separated;
      r.gamma_used = r.gamma.certified_upper;
      r.q0_bunching = q0_bunching(ifs, r.gamma_used, d);
      const MarginReport b = check_bunching(ifs, r.gamma_used, d, 2.0);
      r.bunching_at_2 = b.pass;
      r.per_map_margins = b.margins;
      if (c.probabilities) {
        r.q0_metric = q0_metric_bunching(ifs, r.gamma_used, *c.probabilities, k, p.tol, p.budget);
        d2 = lq_exponent(ifs, bernoulli_weights(*c.probabilities), 2.0, k, p.tol, p.budget).value;
      }
      r.prop3 = prop3_check(ifs, r.gamma_used, d2.value_or(d), d);
    }

    bool fails = !r.positivity || r.d_at_most_one == Verdict::Fails;
    if (r.positivity) fails = fails || !r.q0_bunching.admits_q_above_2() || (r.q0_metric && !r.q0_metric->admits_q_above_2());
    const bool undetermined =
        r.separation.status == CertStatus::Undetermined || r.d_at_most_one == Verdict::Inconclusive;
    const int code = fails ? exit_code::kFails : undetermined ? exit_code::kUndetermined : exit_code::kOk;

    err << "positivity (P)        " << (r.positivity ? "holds" : "fails") << '\n'
        << "separation (S)        " << to_string(r.separation.status) << " at depth " << r.separation.depth
        << ", gap " << fmt(r.separation.gap, "%.6g") << '\n'
        << "affinity dimension d  " << fmt(r.dimension.value) << " in [" << fmt(r.dimension.lower_heuristic) << ", "
        << fmt(r.dimension.upper_certified) << "], depth " << r.dimension.depth << '\n'
        << "d <= 1                " << to_string(r.d_at_most_one) << '\n';
    if (r.positivity) {
      err << "gamma                 " << fmt(r.gamma_used) << (r.gamma.separated ? " (separated)" : "") << '\n'
          << "  n   N_n_max   gamma_hat_n\n";
      for (const GammaLevel& g : r.gamma.per_level) {
        char line[96];
        std::snprintf(line, sizeof line, "  %-3zu %-9llu %.6f\n", g.depth,
                      static_cast<unsigned long long>(g.max_overlap), g.gamma_hat);
        err << line;
      }
      err << "q0 (B)                " << r.q0_bunching.to_string() << '\n';
      if (r.q0_metric) err << "q0 (MB)               " << r.q0_metric->to_string() << '\n';
      err << "prop3 exists          " << (r.prop3.exists ? "yes" : "no") << " (sum " << fmt(r.prop3.condition_sum)
          << ")\n";
    }
    err << "exit                  " << code << '\n';

    if (opts.format == Format::Json) {
      ordered_json j;
      j["positivity"] = r.positivity;
      j["separation"] = {{"status", to_string(r.separation.status)},
                         {"gap", num(r.separation.gap)},
                         {"depth", r.separation.depth}};
      j["dimension"] = dimension_json(r.dimension);
      j["d_at_most_one"] = to_string(r.d_at_most_one);
      if (r.positivity) {
        ordered_json levels = ordered_json::array();
        for (const GammaLevel& g : r.gamma.per_level)
          levels.push_back(
              {{"n", g.depth}, {"N_n_max", g.max_overlap}, {"gamma_hat_n", g.gamma_hat}, {"resolved", g.resolved}});
        j["gamma"] = {{"levels", levels},
                      {"certified_upper", r.gamma.certified_upper},
                      {"separated", r.gamma.separated},
                      {"submultiplicative", r.gamma.submultiplicative},
                      {"complete", gamma_complete}};
        j["projectively_separated"] = r.projectively_separated;
        j["gamma_used"] = r.gamma_used;
        j["q0_bunching"] = threshold_json(r.q0_bunching);
        j["bunching_at_2"] = r.bunching_at_2;
        j["per_map_margins"] = r.per_map_margins;
        j["q0_metric_bunching"] = r.q0_metric ? threshold_json(*r.q0_metric) : ordered_json(nullptr);
        j["prop3"] = {{"exists", r.prop3.exists},
                      {"d2", d2.value_or(d)},
                      {"condition_sum", r.prop3.condition_sum},
                      {"alpha2_half_sum", r.prop3.alpha2_half_sum},
                      {"alpha1_d2_sum", r.prop3.alpha1_d2_sum},
                      {"alpha1_d_sum", r.prop3.alpha1_d_sum}};
      } else {
        j["gamma"] = nullptr;
        j["projectively_separated"] = nullptr;
        j["q0_bunching"] = nullptr;
        j["q0_metric_bunching"] = nullptr;
        j["prop3"] = nullptr;
      }
      j["exit_code"] = code;
      emit(j.dump(2) + "\n", "check.json", opts, out);
    } else {
      std::ostringstream s;
      s << "key,value\n"
        << "positivity," << r.positivity << '\n'
        << "separation," << to_string(r.separation.status) << '\n'
        << "separation_gap," << format_double(r.separation.gap) << '\n'
        << "d," << format_double(r.dimension.value) << '\n'
        << "d_bracket_lo," << format_double(r.dimension.lower_heuristic) << '\n'
        << "d_bracket_hi," << format_double(r.dimension.upper_certified) << '\n'
        << "d_at_most_one," << to_string(r.d_at_most_one) << '\n';
      if (r.positivity) {
        s << "gamma," << format_double(r.gamma_used) << '\n'
          << "gamma_separated," << r.gamma.separated << '\n'
          << "q0_bunching," << r.q0_bunching.to_string() << '\n'
          << "bunching_at_2," << r.bunching_at_2 << '\n';
        if (r.q0_metric) s << "q0_metric_bunching," << r.q0_metric->to_string() << '\n';
        s << "prop3_exists," << r.prop3.exists << '\n';
      }
      s << "exit_code," << code << '\n';
      emit(s.str(), "check.csv", opts, out);
    }
    return code;
  });
}

int cmd_dim(const RunConfig& c, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    set_workers(c.params.workers);
    const Ifs ifs = c.system();
    const Params& p = c.params;
    std::size_t k = level_depth(c);
    bool partial = false;
    // Over budget: fall back to the deepest affordable level and mark the output.
    if (word_count(ifs.size(), k) > p.budget) {
      const std::size_t wanted = k;
      while (k > 0 && word_count(ifs.size(), k) > p.budget) --k;
      if (k == 0) throw ResourceError("no level fits the enumeration budget");
      partial = true;
      err << "warning: depth " << wanted << " exceeds the budget; results at depth " << k << " are partial\n";
    }

    const LevelTable table = level_table(ifs, k, p.budget);
    const DimensionEstimate d = affinity_dim(ifs, table, p.tol);
    const WeightChoice choice = weight_choice(c);
    const WeightModel w = choice == WeightChoice::Bernoulli ? bernoulli_weights(bernoulli_vector(c))
                                                            : kaenmaki_weights(ifs, d.value, k, p.budget);
    const auto masses = w.log_masses(table);

    struct Row {
      double q;
      DimensionEstimate e;
    };
    std::vector<Row> rows;
    for (double q : p.qs) {
      if (!(q > 1)) {
        err << "note: d(q) is defined for q > 1; skipping q = " << format_double(q) << '\n';
        continue;
      }
      rows.push_back({q, lq_exponent(table, masses, q, p.tol)});
    }

    err << "d = " << fmt(d.value) << " in [" << fmt(d.lower_heuristic) << ", " << fmt(d.upper_certified)
        << "] at depth " << k << (d.converged ? "" : " (not converged)") << '\n'
        << "weights: " << (choice == WeightChoice::Bernoulli ? "bernoulli" : "kaenmaki") << '\n'
        << "  q      d(q)\n";
    for (const Row& r : rows) err << "  " << fmt(r.q, "%-6.3g") << " " << fmt(r.e.value) << '\n';

    if (opts.format == Format::Json) {
      ordered_json j;
      j["d"] = dimension_json(d);
      j["weights"] = choice == WeightChoice::Bernoulli ? "bernoulli" : "kaenmaki";
      j["rows"] = ordered_json::array();
      for (const Row& r : rows)
        j["rows"].push_back({{"q", r.q},
                             {"dq_value", r.e.value},
                             {"depth", r.e.depth},
                             {"bracket_lo", r.e.lower_heuristic},
                             {"bracket_hi", r.e.upper_certified}});
      j["partial"] = partial;
      emit(j.dump(2) + "\n", "dim.json", opts, out);
    } else {
      std::ostringstream s;
      s << "q,dq_value,depth,bracket_lo,bracket_hi\n";
      for (const Row& r : rows)
        s << format_double(r.q) << ',' << format_double(r.e.value) << ',' << r.e.depth << ','
          << format_double(r.e.lower_heuristic) << ',' << format_double(r.e.upper_certified) << '\n';
      if (partial) s << "# partial: depth reduced to " << k << '\n';
      emit(s.str(), "dim.csv", opts, out);
    }
    return partial ? exit_code::kResource : exit_code::kOk;
  });
}

int cmd_lq(const RunConfig& c, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    set_workers(c.params.workers);
    const Ifs ifs = c.system();
    const Params& p = c.params;
    const std::size_t k = level_depth(c);
    const DimensionEstimate d = affinity_dim(ifs, k, p.tol, p.budget);
    const WeightChoice choice = weight_choice(c);
    const WeightModel w = estimator_weights(c, ifs, d.value);
    const auto deltas = schedule(c);

    LqOptions lo;
    lo.raster.budget = p.budget;
    const LqSpectrum spec = lq_spectrum(ifs, w, p.qs, deltas, lo);

    // Käenmäki: the prediction is d for every q. Bernoulli: d(q) for q > 1.
    std::vector<double> theory;
    const WeightModel bw = bernoulli_weights(bernoulli_vector(c));
    for (double q : p.qs) {
      if (choice == WeightChoice::Kaenmaki)
        theory.push_back(d.value);
      else if (q > 1)
        theory.push_back(lq_exponent(ifs, bw, q, k, p.tol, p.budget).value);
      else
        theory.push_back(NAN);
    }

    err << "weights: " << (choice == WeightChoice::Bernoulli ? "bernoulli" : "kaenmaki") << ", d = " << fmt(d.value)
        << '\n'
        << "  q      slope     R^2       theory    deviation\n";
    for (std::size_t i = 0; i < spec.fits.size(); ++i) {
      const LqFit& f = spec.fits[i];
      char line[128];
      std::snprintf(line, sizeof line, "  %-6.3g %-9.6f %-9.6f %-9.6f %.6f\n", f.q, f.slope, f.r_squared, theory[i],
                    std::abs(f.slope - theory[i]));
      err << line;
    }
    for (std::size_t j = 0; j < deltas.size(); ++j)
      if (spec.depth_capped[j]) err << "warning: delta " << format_double(deltas[j]) << " hit the depth cap\n";

    if (opts.format == Format::Json) {
      ordered_json j;
      j["weights"] = choice == WeightChoice::Bernoulli ? "bernoulli" : "kaenmaki";
      j["d"] = d.value;
      j["deltas"] = deltas;
      j["used"] = spec.used;
      j["depth_capped"] = spec.depth_capped;
      j["rows"] = ordered_json::array();
      for (std::size_t i = 0; i < spec.fits.size(); ++i) {
        const LqFit& f = spec.fits[i];
        j["rows"].push_back({{"q", f.q},
                             {"slope", f.slope},
                             {"intercept", f.intercept},
                             {"r_squared", f.r_squared},
                             {"points", f.points},
                             {"theory", num(theory[i])},
                             {"deviation", num(std::abs(f.slope - theory[i]))}});
      }
      emit(j.dump(2) + "\n", "lq.json", opts, out);
    } else {
      std::ostringstream s;
      s << "q,slope,intercept,r_squared,points,theory,deviation\n";
      for (std::size_t i = 0; i < spec.fits.size(); ++i) {
        const LqFit& f = spec.fits[i];
        s << format_double(f.q) << ',' << format_double(f.slope) << ',' << format_double(f.intercept) << ','
          << format_double(f.r_squared) << ',' << f.points << ',' << format_double(theory[i]) << ','
          << format_double(std::abs(f.slope - theory[i])) << '\n';
      }
      emit(s.str(), "lq.csv", opts, out);
    }
    if (!opts.out_dir.empty()) {
      std::ostringstream m;
      write_moments_csv(m, spec);
      emit(m.str(), "moments.csv", opts, out);
    }
    return exit_code::kOk;
  });
}

int cmd_diag(const RunConfig& c, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    set_workers(c.params.workers);
    const Ifs ifs = c.system();
    const Params& p = c.params;
    const std::size_t k = level_depth(c);
    const DimensionEstimate d = affinity_dim(ifs, k, p.tol, p.budget);
    const WeightChoice choice = weight_choice(c);
    const WeightModel w = estimator_weights(c, ifs, d.value);
    const WeightModel bw = bernoulli_weights(bernoulli_vector(c));

    EnergyOptions eo;
    eo.steps = p.energy_steps;
    std::ostringstream rcsv, ecsv;
    ordered_json runs = ordered_json::array();
    err << "  s         q     r-curve      last_incr   energy\n";
    for (std::size_t i = 0; i < p.diag.size(); ++i) {
      const DiagPoint& pt = p.diag[i];
      // Offsets are relative to the predicted exponent of the chosen weights.
      double base = d.value;
      if (pt.relative && choice == WeightChoice::Bernoulli) base = lq_exponent(ifs, bw, pt.q, k, p.tol, p.budget).value;
      const double s = pt.relative ? base + pt.s : pt.s;
      if (!(s > 0 && s < 2)) throw InputError("params.diag[" + std::to_string(i) + "]: s = " + format_double(s) +
                                              " lies outside (0, 2)");
      const RCurve rc = r_diagnostic(ifs, w, s, pt.q, p.r_depth, p.n_angles, p.budget);
      const EnergyReport er = energy_mc(ifs, w, s, pt.q, p.n_outer, p.n_inner, p.seed + i, eo);
      write_rcurve_csv(rcsv, rc, s, pt.q, i == 0);
      write_energy_csv(ecsv, er, i == 0);

      const char* trend = rc.saturating ? "saturating" : rc.growing ? "growing" : "undecided";
      char line[128];
      std::snprintf(line, sizeof line, "  %-9.6f %-5.3g %-12s %-11.6f %s\n", s, pt.q, trend,
                    rc.last_relative_increment, to_string(er.flag).c_str());
      err << line;
      if (er.rejection_warning) err << "warning: energy sampler rejected " << er.rejections << " of " << er.draws << '\n';

      ordered_json steps = ordered_json::array();
      for (const EnergyStep& st : er.schedule)
        steps.push_back({{"resolution", st.resolution},
                         {"mean_depth", st.mean_depth},
                         {"estimate", num(st.estimate)},
                         {"standard_error", num(st.standard_error)}});
      runs.push_back({{"s", s},
                      {"q", pt.q},
                      {"r_curve",
                       {{"max_per_level", rc.max_per_level},
                        {"last_relative_increment", rc.last_relative_increment},
                        {"saturating", rc.saturating},
                        {"growing", rc.growing}}},
                      {"energy",
                       {{"flag", to_string(er.flag)},
                        {"schedule", steps},
                        {"draws", er.draws},
                        {"rejections", er.rejections},
                        {"seed", p.seed + i}}}});
    }

    if (opts.format == Format::Json) {
      ordered_json j;
      j["weights"] = choice == WeightChoice::Bernoulli ? "bernoulli" : "kaenmaki";
      j["d"] = d.value;
      j["runs"] = runs;
      emit(j.dump(2) + "\n", "diag.json", opts, out);
    } else if (opts.out_dir.empty()) {
      // Two gnuplot data blocks separated by a double blank line.
      out << rcsv.str() << "\n\n" << ecsv.str();
    } else {
      emit(rcsv.str(), "rcurve.csv", opts, out);
      emit(ecsv.str(), "energy.csv", opts, out);
    }
    return exit_code::kOk;
  });
}

int cmd_render(const RunConfig& c, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    set_workers(c.params.workers);
    const Ifs ifs = c.system();
    const Params& p = c.params;
    const double d = affinity_dim(ifs, level_depth(c), p.tol, p.budget).value;
    const WeightModel w = estimator_weights(c, ifs, d);
    RasterOptions ro;
    ro.budget = p.budget;
    const GridMeasure g = rasterize(ifs, w, p.render_delta, ro);

    err << "cells " << g.cells.size() << ", total mass " << fmt(g.total_mass(), "%.12f") << ", longest word "
        << g.max_word_length << (g.depth_capped ? " (depth capped)" : "") << '\n';

    const std::string dir = opts.out_dir.empty() ? "." : opts.out_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw OutputError(dir + ": " + ec.message());
    const auto base = std::filesystem::path(dir);
    write_png((base / "measure.png").string(), render_grid(g));
    std::ostringstream cells;
    write_cells_csv(cells, g);
    write_text((base / "cells.csv").string(), cells.str());

    if (opts.format == Format::Json) {
      ordered_json j;
      j["delta"] = g.delta;
      j["cells"] = g.cells.size();
      j["total_mass"] = g.total_mass();
      j["max_word_length"] = g.max_word_length;
      j["depth_capped"] = g.depth_capped;
      j["image"] = (base / "measure.png").string();
      j["csv"] = (base / "cells.csv").string();
      out << j.dump(2) << '\n';
    } else {
      out << cells.str();
    }
    return exit_code::kOk;
  });
}

int cmd_fixtures(const std::string& name, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!name.empty()) {
      emit(serialize_config(fixture_config(name)), name + ".json", opts, out);
      return exit_code::kOk;
    }
    for (const std::string& n : fixtures::names()) {
      if (opts.out_dir.empty())
        out << n << '\n';
      else
        emit(serialize_config(fixture_config(n)), n + ".json", opts, out);
    }
    return exit_code::kOk;
  });
}

}  // namespace lqdim
