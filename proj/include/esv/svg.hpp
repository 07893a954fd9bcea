#pragma once

#include <string>

#include "esv/common.hpp"

namespace esv {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

// Assembles a standalone SVG 1.1 document, elements in emission order.
class SvgDocument {
 public:
  SvgDocument(double width, double height) : width_(width), height_(height) {}

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& cls = "", const std::string& title = "") {
    body_ += "  <rect";
    if (!cls.empty()) body_ += " class=\"" + cls + "\"";
    body_ += " x=\"" + fmt_px(x) + "\" y=\"" + fmt_px(y) + "\" width=\"" + fmt_px(w) +
             "\" height=\"" + fmt_px(h) + "\" fill=\"" + fill + "\"";
    if (title.empty()) {
      body_ += "/>\n";
    } else {
      body_ += "><title>" + xml_escape(title) + "</title></rect>\n";
    }
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double stroke_width, const std::string& cls = "") {
    body_ += "  <line";
    if (!cls.empty()) body_ += " class=\"" + cls + "\"";
    body_ += " x1=\"" + fmt_px(x1) + "\" y1=\"" + fmt_px(y1) + "\" x2=\"" + fmt_px(x2) +
             "\" y2=\"" + fmt_px(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
             fmt_px(stroke_width) + "\"/>\n";
  }

  void text(double x, double y, const std::string& content, const std::string& fill = "#333333",
            double size = 11.0, const std::string& anchor = "start") {
    body_ += "  <text x=\"" + fmt_px(x) + "\" y=\"" + fmt_px(y) + "\" font-size=\"" +
             fmt_px(size) + "\" font-family=\"sans-serif\" fill=\"" + fill +
             "\" text-anchor=\"" + anchor + "\">" + xml_escape(content) + "</text>\n";
  }

  // points: "x1,y1 x2,y2 ..."
  void polygon(const std::string& points, const std::string& fill, double opacity = 1.0) {
    body_ += "  <polygon points=\"" + points + "\" fill=\"" + fill + "\" fill-opacity=\"" +
             fmt_g(opacity, 4) + "\"/>\n";
  }

  void polyline(const std::string& points, const std::string& stroke, double stroke_width) {
    body_ += "  <polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + stroke +
             "\" stroke-width=\"" + fmt_px(stroke_width) + "\"/>\n";
  }

  std::string str() const {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           fmt_px(width_) + "\" height=\"" + fmt_px(height_) + "\" viewBox=\"0 0 " +
           fmt_px(width_) + " " + fmt_px(height_) + "\">\n";
    out += body_;
    out += "</svg>\n";
    return out;
  }

 private:
  double width_;
  double height_;
  std::string body_;
};

}  // namespace esv
