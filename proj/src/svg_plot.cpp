#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace splap::plot {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 80, kRight = 30, kTop = 40, kBottom = 60;

struct Axes {
  double x0, x1, y0, y1;  // decades

  double px(double tau) const {
    return kLeft + (std::log10(tau) - x0) / (x1 - x0) * (kWidth - kLeft - kRight);
  }
  double py(double v) const {
    return kHeight - kBottom - (std::log10(v) - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string polyline(const Axes& ax, const std::vector<double>& taus,
                     const std::vector<double>& vals, const std::string& style) {
  std::string pts;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(vals[i] > 0.0)) continue;
    pts += num(ax.px(taus[i])) + "," + num(ax.py(vals[i])) + " ";
  }
  if (pts.empty()) return {};
  return "<polyline fill=\"none\" " + style + " points=\"" + pts + "\"/>\n";
}

}  // namespace

std::string rate_figure(const analysis::RateEstimate& est,
                        const std::vector<analysis::ResultRow>& rows) {
  std::vector<double> taus;
  for (double t : est.taus) {
    if (t > est.tau_ref) taus.push_back(t);
  }
  std::sort(taus.begin(), taus.end());

  std::map<int, std::map<double, double>> curves;
  double vmin = HUGE_VAL, vmax = 0.0;
  for (const auto& r : rows) {
    if (r.p != est.p || !(r.tau > est.tau_ref)) continue;
    curves[r.replicate][r.tau] = r.e_total;
    if (r.e_total > 0.0) {
      vmin = std::min(vmin, r.e_total);
      vmax = std::max(vmax, r.e_total);
    }
  }
  if (taus.empty() || vmax <= 0.0) {
    vmin = 1e-3;
    vmax = 1.0;
  }
  if (taus.empty()) taus = {0.1, 1.0};

  Axes ax{std::floor(std::log10(taus.front())), std::ceil(std::log10(taus.back())),
          std::floor(std::log10(vmin)), std::ceil(std::log10(vmax))};
  if (ax.x1 <= ax.x0) ax.x1 = ax.x0 + 1;
  if (ax.y1 <= ax.y0) ax.y1 = ax.y0 + 1;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">p = " << fmt("%g", est.p) << "</text>\n";

  // Frame and decade ticks.
  const double l = kLeft, r = kWidth - kRight, t = kTop, b = kHeight - kBottom;
  svg << "<rect x=\"" << l << "\" y=\"" << t << "\" width=\"" << r - l << "\" height=\""
      << b - t << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(ax.x0); d <= static_cast<int>(ax.x1); ++d) {
    const double x = ax.px(std::pow(10.0, d));
    svg << "<line x1=\"" << num(x) << "\" y1=\"" << b << "\" x2=\"" << num(x) << "\" y2=\""
        << b + 6 << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << num(x) << "\" y=\"" << b + 22
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">1e" << d
        << "</text>\n";
  }
  for (int d = static_cast<int>(ax.y0); d <= static_cast<int>(ax.y1); ++d) {
    const double y = ax.py(std::pow(10.0, d));
    svg << "<line x1=\"" << l - 6 << "\" y1=\"" << num(y) << "\" x2=\"" << l << "\" y2=\""
        << num(y) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << l - 10 << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e" << d
        << "</text>\n";
  }
  svg << "<text x=\"" << (l + r) / 2 << "\" y=\"" << kHeight - 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">tau</text>\n"
      << "<text x=\"18\" y=\"" << (t + b) / 2 << "\" transform=\"rotate(-90 18 " << (t + b) / 2
      << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">E(tau)</text>\n";

  for (const auto& [rep, curve] : curves) {
    std::vector<double> xs, ys;
    for (const auto& [tau, v] : curve) {
      xs.push_back(tau);
      ys.push_back(v);
    }
    svg << polyline(ax, xs, ys, "stroke=\"#c8c8c8\" stroke-width=\"1\"");
  }

  std::vector<double> mt, mv, up, lo;
  for (std::size_t i = 0; i < est.taus.size(); ++i) {
    if (!(est.taus[i] > est.tau_ref)) continue;
    mt.push_back(est.taus[i]);
    mv.push_back(est.mean[i]);
    up.push_back(est.mean[i] + est.stddev[i]);
    lo.push_back(est.mean[i] - est.stddev[i]);
  }
  svg << polyline(ax, mt, mv, "stroke=\"#d62728\" stroke-width=\"2.5\"")
      << polyline(ax, mt, up, "stroke=\"#d62728\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"")
      << polyline(ax, mt, lo, "stroke=\"#d62728\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"");

  if (std::isfinite(est.mean_curve.a) && !est.fit_taus.empty()) {
    const auto [tmin, tmax] = std::minmax_element(est.fit_taus.begin(), est.fit_taus.end());
    const double c = std::exp(est.mean_curve.log_c);
    const std::vector<double> lt{*tmin, *tmax};
    const std::vector<double> lv{c * std::pow(*tmin, est.mean_curve.a),
                                 c * std::pow(*tmax, est.mean_curve.a)};
    svg << polyline(ax, lt, lv, "stroke=\"#1f77b4\" stroke-width=\"2\"");
    svg << "<text x=\"" << l + 12 << "\" y=\"" << t + 20
        << "\" font-family=\"sans-serif\" font-size=\"14\" fill=\"#1f77b4\">"
        << fmt("%.3g", c) << " &#183; &#964;<tspan baseline-shift=\"super\" font-size=\"11\">"
        << fmt("%.2f", est.a_biased) << " &#177; " << fmt("%.2f", est.stderr_biased)
        << "</tspan></text>\n";
    if (std::isfinite(est.a_corrected)) {
      svg << "<text x=\"" << l + 12 << "\" y=\"" << t + 40
          << "\" font-family=\"sans-serif\" font-size=\"12\">bias-corrected a = "
          << fmt("%.2f", est.a_corrected) << ", &#945; = " << fmt("%.2f", est.alpha)
          << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace splap::plot
