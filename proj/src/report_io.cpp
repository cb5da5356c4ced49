#include <iomanip>
#include <ostream>

#include "dirand/guessprob.hpp"

namespace dirand {

void write_report(std::ostream& out, const GuessReport& r) {
  const auto old = out.precision(15);
  out << "G," << r.guessing_probability << '\n'
      << "hmin," << r.hmin << '\n'
      << "level," << r.level << '\n'
      << "xstar," << r.xstar + 1 << '\n'
      << "ystar," << r.ystar + 1 << '\n'
      << "status," << sdp::to_string(r.status) << '\n'
      << "q(++)," << r.q(1, 1) << '\n'
      << "q(+-)," << r.q(1, -1) << '\n'
      << "q(-+)," << r.q(-1, 1) << '\n'
      << "q(--)," << r.q(-1, -1) << '\n'
      << "offset," << r.bell_expression.offset << '\n';
  const BellExpression& f = r.bell_expression;
  out << "a,b,x,y,f\n";
  if (!f.coeffs.empty()) {
    for (int a : {-1, 1})
      for (int b : {-1, 1})
        for (int x = 0; x < f.mx; ++x)
          for (int y = 0; y < f.my; ++y)
            out << a << ',' << b << ',' << x + 1 << ',' << y + 1 << ','
                << f.coeffs[Behavior::component_index(f.mx, f.my, a, b, x, y)] << '\n';
  }
  if (r.witness) {
    out << "witness\n";
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) out << (j ? "," : "") << (*r.witness)(i, j);
      out << '\n';
    }
  }
  out.precision(old);
}

}  // namespace dirand
