// Exits non-zero unless UMFPACK solves a nonsymmetric convection-diffusion
// system to roundoff with the BLAS it is linked against.
#include <umfpack.h>

#include <cmath>
#include <cstdio>
#include <vector>

int main() {
  const int m = 60;
  const int n = m * m;
  std::vector<int> ap(n + 1);
  std::vector<int> ai;
  std::vector<double> ax;
  for (int j = 0; j < n; ++j) {
    const int jx = j % m;
    const int jy = j / m;
    ap[j] = static_cast<int>(ai.size());
    auto push = [&](int i, double v) {
      ai.push_back(i);
      ax.push_back(v);
    };
    if (jy > 0) push(j - m, -1.3);
    if (jx > 0) push(j - 1, -1.2);
    push(j, 4.0 + 0.01 * (j % 7));
    if (jx < m - 1) push(j + 1, -0.8);
    if (jy < m - 1) push(j + m, -0.7);
  }
  ap[n] = static_cast<int>(ai.size());
  std::vector<double> b(n);
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) b[i] = std::sin(0.37 * i) + 1.0;

  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  void* symbolic = nullptr;
  void* numeric = nullptr;
  umfpack_di_defaults(control);
  control[UMFPACK_IRSTEP] = 0;
  if (umfpack_di_symbolic(n, n, ap.data(), ai.data(), ax.data(), &symbolic, control, info) != UMFPACK_OK) return 2;
  if (umfpack_di_numeric(ap.data(), ai.data(), ax.data(), symbolic, &numeric, control, info) != UMFPACK_OK) return 3;
  if (umfpack_di_solve(UMFPACK_A, ap.data(), ai.data(), ax.data(), x.data(), b.data(), numeric, control, info) !=
      UMFPACK_OK)
    return 4;

  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = -b[i];
  for (int j = 0; j < n; ++j)
    for (int k = ap[j]; k < ap[j + 1]; ++k) r[ai[k]] += ax[k] * x[j];
  double rn = 0.0;
  double bn = 0.0;
  for (int i = 0; i < n; ++i) {
    rn += r[i] * r[i];
    bn += b[i] * b[i];
  }
  const double rel = std::sqrt(rn / bn);
  std::printf("umfpack probe relative residual %.3e\n", rel);
  umfpack_di_free_numeric(&numeric);
  umfpack_di_free_symbolic(&symbolic);
  return rel < 1e-10 ? 0 : 1;
}
