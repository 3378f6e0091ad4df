#pragma once

#include "unimax/report.hpp"

#include <cstdio>
#include <string>

namespace unimax {

namespace detail {

inline std::string fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

inline std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

// Draws the report's "plot" block. Everything on the canvas comes from the
// JSON, so a re-read report renders the same picture.
inline std::string render_svg(const Report& rep) {
  const Json* plot = rep.doc.contains("plot") ? &rep.doc["plot"] : nullptr;
  if (!plot || plot->is_null()) throw UnsupportedPlot("report has no plot data");
  if (plot->contains("unsupported")) throw UnsupportedPlot((*plot)["unsupported"].get<std::string>());

  constexpr double W = 720, H = 440, L = 70, R = 20, T = 30, B = 50;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  auto widen = [&](double x, double y) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  };
  for (const auto& s : (*plot)["series"]) {
    for (std::size_t i = 0; i < s["x"].size(); ++i) {
      if (!s["y"][i].is_null()) widen(s["x"][i].get<double>(), s["y"][i].get<double>());
    }
  }
  for (const auto& m : (*plot)["markers"]) {
    if (!m["y"].is_null()) widen(m["x"].get<double>(), m["y"].get<double>());
  }
  if (!std::isfinite(xmin)) throw UnsupportedPlot("plot has no finite points");
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto sx = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto sy = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fixed(W) + "\" height=\"" +
         detail::fixed(H) + "\" viewBox=\"0 0 " + detail::fixed(W) + " " + detail::fixed(H) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<g stroke=\"#444\" stroke-width=\"1\">\n";
  out += "<line x1=\"" + detail::fixed(L) + "\" y1=\"" + detail::fixed(H - B) + "\" x2=\"" + detail::fixed(W - R) +
         "\" y2=\"" + detail::fixed(H - B) + "\"/>\n";
  out += "<line x1=\"" + detail::fixed(L) + "\" y1=\"" + detail::fixed(T) + "\" x2=\"" + detail::fixed(L) +
         "\" y2=\"" + detail::fixed(H - B) + "\"/>\n</g>\n";
  out += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double x = xmin + (xmax - xmin) * k / 4.0;
    const double y = ymin + (ymax - ymin) * k / 4.0;
    out += "<text x=\"" + detail::fixed(sx(x)) + "\" y=\"" + detail::fixed(H - B + 16) +
           "\" text-anchor=\"middle\">" + detail::short_number(x) + "</text>\n";
    out += "<text x=\"" + detail::fixed(L - 6) + "\" y=\"" + detail::fixed(sy(y) + 4) + "\" text-anchor=\"end\">" +
           detail::short_number(y) + "</text>\n";
  }
  out += "<text x=\"" + detail::fixed((L + W - R) / 2) + "\" y=\"" + detail::fixed(H - 12) +
         "\" text-anchor=\"middle\">" + detail::xml_escape(plot->value("x_label", std::string{})) + "</text>\n";
  out += "<text x=\"14\" y=\"" + detail::fixed((T + H - B) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         detail::fixed((T + H - B) / 2) + ")\">" + detail::xml_escape(plot->value("y_label", std::string{})) +
         "</text>\n</g>\n";

  std::size_t c = 0;
  for (const auto& s : (*plot)["series"]) {
    std::string pts;
    for (std::size_t i = 0; i < s["x"].size(); ++i) {
      if (s["y"][i].is_null()) continue;
      pts += (pts.empty() ? "" : " ") + detail::fixed(sx(s["x"][i].get<double>())) + "," +
             detail::fixed(sy(s["y"][i].get<double>()));
    }
    const char* color = colors[c % 6];
    out += "<polyline class=\"series\" fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"><title>" +
           detail::xml_escape(s.value("label", std::string{})) + "</title></polyline>\n";
    out += "<text x=\"" + detail::fixed(W - R - 4) + "\" y=\"" + detail::fixed(T + 14.0 * static_cast<double>(c)) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + color + "\">" +
           detail::xml_escape(s.value("label", std::string{})) + "</text>\n";
    ++c;
  }
  for (const auto& m : (*plot)["markers"]) {
    if (m["y"].is_null()) continue;
    out += "<circle class=\"marker\" cx=\"" + detail::fixed(sx(m["x"].get<double>())) + "\" cy=\"" +
           detail::fixed(sy(m["y"].get<double>())) + "\" r=\"4\" fill=\"black\"><title>" +
           detail::xml_escape(m.value("label", std::string{})) + " at " + detail::short_number(m["x"].get<double>()) +
           "</title></circle>\n";
  }
  out += "</svg>\n";
  return out;
}

inline std::string render(const Report& rep, Format format) {
  switch (format) {
    case Format::json: return render_json(rep);
    case Format::csv: return render_csv(rep);
    case Format::svg: return render_svg(rep);
  }
  return {};
}

// Writes next to the target and renames, so readers never see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw MalformedInput("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw MalformedInput("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline void emit(const Report& rep, Format format, const std::filesystem::path& path) {
  write_atomic(path, render(rep, format));
}

}  // namespace unimax
