#include "lls/cobyla.hpp"

#include "lls/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lls {

const char* to_string(CobylaStatus s) {
  switch (s) {
    case CobylaStatus::Converged:
      return "converged";
    case CobylaStatus::MaxEvalsReached:
      return "max_evals_reached";
    case CobylaStatus::RoundingErrors:
      return "rounding_errors";
  }
  return "?";
}

namespace {

// 1-based views so the port stays line-for-line comparable with the Fortran.
struct Vec1 {
  std::vector<double> d;
  explicit Vec1(int n) : d(static_cast<std::size_t>(std::max(n, 0)), 0.0) {}
  double& operator()(int i) { return d[static_cast<std::size_t>(i - 1)]; }
};

struct IVec1 {
  std::vector<int> d;
  explicit IVec1(int n) : d(static_cast<std::size_t>(std::max(n, 0)), 0) {}
  int& operator()(int i) { return d[static_cast<std::size_t>(i - 1)]; }
};

struct Mat1 {
  int rows;
  std::vector<double> d;
  Mat1(int r, int c) : rows(r), d(static_cast<std::size_t>(std::max(r * c, 0)), 0.0) {}
  double& operator()(int i, int j) { return d[static_cast<std::size_t>((i - 1) + (j - 1) * rows)]; }
};

// Finds the step dx of length <= rho minimizing first the worst linearized
// constraint violation, then the linearized objective. Columns 1..m of a hold
// constraint gradients, column m+1 minus the objective gradient.
void trstlp(int n, int m, Mat1& a, Vec1& b, double rho, Vec1& dx, int& ifull) {
  Mat1 z(n, n);
  Vec1 zdota(n), vmultc(m + 1), sdirn(n), dxnew(n), vmultd(m + 1);
  IVec1 iact(m + 1);

  int mcon, nact, icon, i, j, k, nactx = 0, isave, kk, kw, kp, kl, icount = 0;
  double resmax, optold = 0.0, optnew, tot, temp, alpha, beta, sp, spabs, acca, accb, ratio, zdotv, zdvabs, vsave,
      dd, ss, sd, stpful, step, zdotw, zdwabs, resold = 0.0, sumabs, sum, tempa;

  ifull = 1;
  mcon = m;
  nact = 0;
  resmax = 0.0;
  icon = 0;
  for (i = 1; i <= n; i++) {
    for (j = 1; j <= n; j++) z(i, j) = 0.0;
    z(i, i) = 1.0;
    dx(i) = 0.0;
  }
  if (m >= 1) {
    for (k = 1; k <= m; k++) {
      if (b(k) > resmax) {
        resmax = b(k);
        icon = k;
      }
    }
    for (k = 1; k <= m; k++) {
      iact(k) = k;
      vmultc(k) = resmax - b(k);
    }
  }
  if (resmax == 0.0) goto line_480;
  for (i = 1; i <= n; i++) sdirn(i) = 0.0;

  // End the stage after 3 iterations without progress (prevents cycling).
line_60:
  optold = 0.0;
  icount = 0;
line_70:
  if (mcon == m) {
    optnew = resmax;
  } else {
    optnew = 0.0;
    for (i = 1; i <= n; i++) optnew -= dx(i) * a(i, mcon);
  }
  if (icount == 0 || optnew < optold) {
    optold = optnew;
    nactx = nact;
    icount = 3;
  } else if (nact > nactx) {
    nactx = nact;
    icount = 3;
  } else {
    icount = icount - 1;
    if (icount == 0) goto line_490;
  }

  // Add constraint iact(icon) to the active set via Givens rotations of Z.
  if (icon <= nact) goto line_260;
  kk = iact(icon);
  for (i = 1; i <= n; i++) dxnew(i) = a(i, kk);
  tot = 0.0;
  k = n;
  while (k > nact) {
    sp = 0.0;
    spabs = 0.0;
    for (i = 1; i <= n; i++) {
      temp = z(i, k) * dxnew(i);
      sp += temp;
      spabs += std::fabs(temp);
    }
    acca = spabs + 0.1 * std::fabs(sp);
    accb = spabs + 0.2 * std::fabs(sp);
    if (spabs >= acca || acca >= accb) sp = 0.0;
    if (tot == 0.0) {
      tot = sp;
    } else {
      kp = k + 1;
      temp = std::sqrt(sp * sp + tot * tot);
      alpha = sp / temp;
      beta = tot / temp;
      tot = temp;
      for (i = 1; i <= n; i++) {
        temp = alpha * z(i, k) + beta * z(i, kp);
        z(i, kp) = alpha * z(i, kp) - beta * z(i, k);
        z(i, k) = temp;
      }
    }
    k = k - 1;
  }

  if (tot != 0.0) {
    nact = nact + 1;
    zdota(nact) = tot;
    vmultc(icon) = vmultc(nact);
    vmultc(nact) = 0.0;
    goto line_210;
  }

  // The new gradient is a combination of the active ones: one must leave.
  // A zero gradient with nothing active leaves no direction at all.
  if (nact == 0) goto line_490;
  ratio = -1.0;
  k = nact;
line_130:
  zdotv = 0.0;
  zdvabs = 0.0;
  for (i = 1; i <= n; i++) {
    temp = z(i, k) * dxnew(i);
    zdotv += temp;
    zdvabs += std::fabs(temp);
  }
  acca = zdvabs + 0.1 * std::fabs(zdotv);
  accb = zdvabs + 0.2 * std::fabs(zdotv);
  if (zdvabs < acca && acca < accb) {
    temp = zdotv / zdota(k);
    if (temp > 0.0 && iact(k) <= m) {
      tempa = vmultc(k) / temp;
      if (ratio < 0.0 || tempa < ratio) ratio = tempa;
    }
    if (k >= 2) {
      kw = iact(k);
      for (i = 1; i <= n; i++) dxnew(i) -= temp * a(i, kw);
    }
    vmultd(k) = temp;
  } else {
    vmultd(k) = 0.0;
  }
  k = k - 1;
  if (k > 0) goto line_130;
  if (ratio < 0.0) goto line_490;

  for (k = 1; k <= nact; k++) vmultc(k) = std::max(0.0, vmultc(k) - ratio * vmultd(k));
  if (icon < nact) {
    isave = iact(icon);
    vsave = vmultc(icon);
    k = icon;
    do {
      kp = k + 1;
      kw = iact(kp);
      sp = 0.0;
      for (i = 1; i <= n; i++) sp += z(i, k) * a(i, kw);
      temp = std::sqrt(sp * sp + zdota(kp) * zdota(kp));
      alpha = zdota(kp) / temp;
      beta = sp / temp;
      zdota(kp) = alpha * zdota(k);
      zdota(k) = temp;
      for (i = 1; i <= n; i++) {
        temp = alpha * z(i, kp) + beta * z(i, k);
        z(i, kp) = alpha * z(i, k) - beta * z(i, kp);
        z(i, k) = temp;
      }
      iact(k) = kw;
      vmultc(k) = vmultc(kp);
      k = kp;
    } while (k < nact);
    iact(k) = isave;
    vmultc(k) = vsave;
  }
  temp = 0.0;
  for (i = 1; i <= n; i++) temp += z(i, nact) * a(i, kk);
  if (temp == 0.0) goto line_490;
  zdota(nact) = temp;
  vmultc(icon) = 0.0;
  vmultc(nact) = ratio;

  // Keep the objective as the last active constraint when mcon > m.
line_210:
  iact(icon) = iact(nact);
  iact(nact) = kk;
  if (mcon > m && kk != mcon) {
    k = nact - 1;
    sp = 0.0;
    for (i = 1; i <= n; i++) sp += z(i, k) * a(i, kk);
    temp = std::sqrt(sp * sp + zdota(nact) * zdota(nact));
    alpha = zdota(nact) / temp;
    beta = sp / temp;
    zdota(nact) = alpha * zdota(k);
    zdota(k) = temp;
    for (i = 1; i <= n; i++) {
      temp = alpha * z(i, nact) + beta * z(i, k);
      z(i, nact) = alpha * z(i, k) - beta * z(i, nact);
      z(i, k) = temp;
    }
    iact(nact) = iact(k);
    iact(k) = kk;
    temp = vmultc(k);
    vmultc(k) = vmultc(nact);
    vmultc(nact) = temp;
  }

  if (mcon > m) goto line_320;
  kk = iact(nact);
  temp = 0.0;
  for (i = 1; i <= n; i++) temp += sdirn(i) * a(i, kk);
  temp = temp - 1.0;
  temp = temp / zdota(nact);
  for (i = 1; i <= n; i++) sdirn(i) -= temp * z(i, nact);
  goto line_340;

  // Delete constraint iact(icon) from the active set.
line_260:
  if (icon < nact) {
    isave = iact(icon);
    vsave = vmultc(icon);
    k = icon;
    do {
      kp = k + 1;
      kk = iact(kp);
      sp = 0.0;
      for (i = 1; i <= n; i++) sp += z(i, k) * a(i, kk);
      temp = std::sqrt(sp * sp + zdota(kp) * zdota(kp));
      alpha = zdota(kp) / temp;
      beta = sp / temp;
      zdota(kp) = alpha * zdota(k);
      zdota(k) = temp;
      for (i = 1; i <= n; i++) {
        temp = alpha * z(i, kp) + beta * z(i, k);
        z(i, kp) = alpha * z(i, k) - beta * z(i, kp);
        z(i, k) = temp;
      }
      iact(k) = kk;
      vmultc(k) = vmultc(kp);
      k = kp;
    } while (k < nact);
    iact(k) = isave;
    vmultc(k) = vsave;
  }
  nact = nact - 1;

  if (mcon > m) goto line_320;
  temp = 0.0;
  for (i = 1; i <= n; i++) temp += sdirn(i) * z(i, nact + 1);
  for (i = 1; i <= n; i++) sdirn(i) -= temp * z(i, nact + 1);
  goto line_340;

line_320:
  temp = 1.0 / zdota(nact);
  for (i = 1; i <= n; i++) sdirn(i) = temp * z(i, nact);

  // Step to the trust-region boundary, or the step that zeroes resmax.
line_340:
  dd = rho * rho;
  sd = 0.0;
  ss = 0.0;
  for (i = 1; i <= n; i++) {
    if (std::fabs(dx(i)) >= 1.0e-6 * rho) dd -= dx(i) * dx(i);
    sd += dx(i) * sdirn(i);
    ss += sdirn(i) * sdirn(i);
  }
  if (dd <= 0.0) goto line_490;
  temp = std::sqrt(ss * dd);
  if (std::fabs(sd) >= 1.0e-6 * temp) temp = std::sqrt(ss * dd + sd * sd);
  stpful = dd / (temp + sd);
  step = stpful;
  if (mcon == m) {
    acca = step + 0.1 * resmax;
    accb = step + 0.2 * resmax;
    if (step >= acca || acca >= accb) goto line_480;
    step = std::min(step, resmax);
  }

  for (i = 1; i <= n; i++) dxnew(i) = dx(i) + step * sdirn(i);
  if (mcon == m) {
    resold = resmax;
    resmax = 0.0;
    for (k = 1; k <= nact; k++) {
      kk = iact(k);
      temp = b(kk);
      for (i = 1; i <= n; i++) temp -= a(i, kk) * dxnew(i);
      resmax = std::max(resmax, temp);
    }
  }

  // Multipliers that would hold at dxnew, with rounding noise forced to 0.
  k = nact;
line_390:
  zdotw = 0.0;
  zdwabs = 0.0;
  for (i = 1; i <= n; i++) {
    temp = z(i, k) * dxnew(i);
    zdotw += temp;
    zdwabs += std::fabs(temp);
  }
  acca = zdwabs + 0.1 * std::fabs(zdotw);
  accb = zdwabs + 0.2 * std::fabs(zdotw);
  if (zdwabs >= acca || acca >= accb) zdotw = 0.0;
  vmultd(k) = zdotw / zdota(k);
  if (k >= 2) {
    kk = iact(k);
    for (i = 1; i <= n; i++) dxnew(i) -= vmultd(k) * a(i, kk);
    k = k - 1;
    goto line_390;
  }
  if (mcon > m) vmultd(nact) = std::max(0.0, vmultd(nact));

  for (i = 1; i <= n; i++) dxnew(i) = dx(i) + step * sdirn(i);
  if (mcon > nact) {
    kl = nact + 1;
    for (k = kl; k <= mcon; k++) {
      kk = iact(k);
      sum = resmax - b(kk);
      sumabs = resmax + std::fabs(b(kk));
      for (i = 1; i <= n; i++) {
        temp = a(i, kk) * dxnew(i);
        sum += temp;
        sumabs += std::fabs(temp);
      }
      acca = sumabs + 0.1 * std::fabs(sum);
      accb = sumabs + 0.2 * std::fabs(sum);
      if (sumabs >= acca || acca >= accb) sum = 0.0;
      vmultd(k) = sum;
    }
  }

  ratio = 1.0;
  icon = 0;
  for (k = 1; k <= mcon; k++) {
    if (vmultd(k) < 0.0) {
      temp = vmultc(k) / (vmultc(k) - vmultd(k));
      if (temp < ratio) {
        ratio = temp;
        icon = k;
      }
    }
  }

  temp = 1.0 - ratio;
  for (i = 1; i <= n; i++) dx(i) = temp * dx(i) + ratio * dxnew(i);
  for (k = 1; k <= mcon; k++) vmultc(k) = std::max(0.0, temp * vmultc(k) + ratio * vmultd(k));
  if (mcon == m) resmax = resold + ratio * (resmax - resold);

  if (icon > 0) goto line_70;
  if (step == stpful) return;
line_480:
  mcon = m + 1;
  icon = mcon;
  iact(mcon) = mcon;
  vmultc(mcon) = 0.0;
  goto line_60;

line_490:
  if (mcon == m) goto line_480;
  ifull = 0;
}

}  // namespace

CobylaResult cobyla(int n, int m, const CobylaFunction& fn, std::vector<double> x0, const CobylaSettings& settings) {
  if (n < 1 || m < 0) throw ValidationError("cobyla needs n >= 1 and m >= 0");
  if (static_cast<int>(x0.size()) != n) throw ValidationError("cobyla start point has wrong length");
  if (!(settings.rhobeg > 0.0) || !(settings.rhoend > 0.0) || settings.rhoend > settings.rhobeg) {
    throw ValidationError("cobyla needs 0 < rhoend <= rhobeg", {"optimizer.rhobeg", "optimizer.rhoend"});
  }
  if (settings.max_evals < n + 2) throw ValidationError("cobyla max_evals too small", {"optimizer.max_evals"});

  const int np = n + 1;
  const int mp = m + 1;
  const int mpp = m + 2;
  Mat1 sim(n, np), simi(n, n), datmat(mpp, np), a(n, mp);
  Vec1 con(mpp), vsig(n), veta(n), sigbar(n), dx(n), w(n);
  Vec1 x(n);
  x.d = std::move(x0);
  std::vector<double> xv(static_cast<std::size_t>(n));
  std::vector<double> cv(static_cast<std::size_t>(m));

  const double alpha = 0.25, beta = 2.1, gamma = 0.5, delta = 1.1;
  double rho = settings.rhobeg;
  double parmu = 0.0;
  int nfvals = 0;
  int i, j, k, nbest, l, iflag = 1, ifull = 0, jdrop, ibrnch;
  double resmax = 0.0, phimin, tempa, error, parsig = 0.0, pareta = 0.0, wsig, weta, cvmaxp, cvmaxm, sum, dxsign,
         resnew, barmu, phi, prerec = 0.0, prerem = 0.0, vmold, vmnew, trured, ratio, edgmax, denom, cmin, cmax,
         f = 0.0, temp;
  CobylaStatus status = CobylaStatus::Converged;

  temp = 1.0 / rho;
  for (i = 1; i <= n; i++) {
    sim(i, np) = x(i);
    for (j = 1; j <= n; j++) simi(i, j) = 0.0;
    sim(i, i) = rho;
    simi(i, i) = temp;
  }
  jdrop = np;
  ibrnch = 0;

line_40:
  if (nfvals >= settings.max_evals && nfvals > 0) {
    status = CobylaStatus::MaxEvalsReached;
    goto line_600;
  }
  nfvals = nfvals + 1;
  xv = x.d;
  f = fn(xv, cv);
  if (!std::isfinite(f)) throw NumericalError("objective returned a non-finite value");
  resmax = 0.0;
  for (k = 1; k <= m; k++) {
    con(k) = cv[static_cast<std::size_t>(k - 1)];
    resmax = std::max(resmax, -con(k));
  }
  con(mp) = f;
  con(mpp) = resmax;
  if (ibrnch == 1) goto line_440;

  for (k = 1; k <= mpp; k++) datmat(k, jdrop) = con(k);
  if (nfvals > np) goto line_130;

  // Building the initial simplex: keep the better vertex in pole position.
  if (jdrop <= n) {
    if (datmat(mp, np) <= f) {
      x(jdrop) = sim(jdrop, np);
    } else {
      sim(jdrop, np) = x(jdrop);
      for (k = 1; k <= mpp; k++) {
        datmat(k, jdrop) = datmat(k, np);
        datmat(k, np) = con(k);
      }
      for (k = 1; k <= jdrop; k++) {
        sim(jdrop, k) = -rho;
        temp = 0.0;
        for (i = k; i <= jdrop; i++) temp -= simi(i, k);
        simi(jdrop, k) = temp;
      }
    }
  }
  if (nfvals <= n) {
    jdrop = nfvals;
    x(jdrop) = x(jdrop) + rho;
    goto line_40;
  }
line_130:
  ibrnch = 1;

line_140:
  phimin = datmat(mp, np) + parmu * datmat(mpp, np);
  nbest = np;
  for (j = 1; j <= n; j++) {
    temp = datmat(mp, j) + parmu * datmat(mpp, j);
    if (temp < phimin) {
      nbest = j;
      phimin = temp;
    } else if (temp == phimin && parmu == 0.0) {
      if (datmat(mpp, j) < datmat(mpp, nbest)) nbest = j;
    }
  }

  if (nbest <= n) {
    for (i = 1; i <= mpp; i++) {
      temp = datmat(i, np);
      datmat(i, np) = datmat(i, nbest);
      datmat(i, nbest) = temp;
    }
    for (i = 1; i <= n; i++) {
      temp = sim(i, nbest);
      sim(i, nbest) = 0.0;
      sim(i, np) = sim(i, np) + temp;
      tempa = 0.0;
      for (k = 1; k <= n; k++) {
        sim(i, k) = sim(i, k) - temp;
        tempa -= simi(k, i);
      }
      simi(nbest, i) = tempa;
    }
  }

  error = 0.0;
  for (i = 1; i <= n; i++) {
    for (j = 1; j <= n; j++) {
      temp = (i == j) ? -1.0 : 0.0;
      for (k = 1; k <= n; k++) temp += simi(i, k) * sim(k, j);
      error = std::max(error, std::fabs(temp));
    }
  }
  if (error > 0.1) {
    status = CobylaStatus::RoundingErrors;
    goto line_600;
  }

  // Linear models; minus the objective gradient goes in column mp.
  for (k = 1; k <= mp; k++) {
    con(k) = -datmat(k, np);
    for (j = 1; j <= n; j++) w(j) = datmat(k, j) + con(k);
    for (i = 1; i <= n; i++) {
      temp = 0.0;
      for (j = 1; j <= n; j++) temp += w(j) * simi(j, i);
      if (k == mp) temp = -temp;
      a(i, k) = temp;
    }
  }

  iflag = 1;
  parsig = alpha * rho;
  pareta = beta * rho;
  for (j = 1; j <= n; j++) {
    wsig = 0.0;
    weta = 0.0;
    for (i = 1; i <= n; i++) {
      wsig += simi(j, i) * simi(j, i);
      weta += sim(i, j) * sim(i, j);
    }
    vsig(j) = 1.0 / std::sqrt(wsig);
    veta(j) = std::sqrt(weta);
    if (vsig(j) < parsig || veta(j) > pareta) iflag = 0;
  }

  if (ibrnch == 1 || iflag == 1) goto line_370;
  jdrop = 0;
  temp = pareta;
  for (j = 1; j <= n; j++) {
    if (veta(j) > temp) {
      jdrop = j;
      temp = veta(j);
    }
  }
  if (jdrop == 0) {
    for (j = 1; j <= n; j++) {
      if (vsig(j) < temp) {
        jdrop = j;
        temp = vsig(j);
      }
    }
  }

  temp = gamma * rho * vsig(jdrop);
  for (i = 1; i <= n; i++) dx(i) = temp * simi(jdrop, i);
  cvmaxp = 0.0;
  cvmaxm = 0.0;
  sum = 0.0;
  for (k = 1; k <= mp; k++) {
    sum = 0.0;
    for (i = 1; i <= n; i++) sum += a(i, k) * dx(i);
    if (k < mp) {
      temp = datmat(k, np);
      cvmaxp = std::max(cvmaxp, -sum - temp);
      cvmaxm = std::max(cvmaxm, sum - temp);
    }
  }
  dxsign = 1.0;
  if (parmu * (cvmaxp - cvmaxm) > sum + sum) dxsign = -1.0;

  temp = 0.0;
  for (i = 1; i <= n; i++) {
    dx(i) = dxsign * dx(i);
    sim(i, jdrop) = dx(i);
    temp += simi(jdrop, i) * dx(i);
  }
  for (i = 1; i <= n; i++) simi(jdrop, i) = simi(jdrop, i) / temp;
  for (j = 1; j <= n; j++) {
    if (j != jdrop) {
      temp = 0.0;
      for (i = 1; i <= n; i++) temp += simi(j, i) * dx(i);
      for (i = 1; i <= n; i++) simi(j, i) -= temp * simi(jdrop, i);
    }
    x(j) = sim(j, np) + dx(j);
  }
  goto line_40;

line_370:
  ifull = 0;
  trstlp(n, m, a, con, rho, dx, ifull);
  if (ifull == 0) {
    temp = 0.0;
    for (i = 1; i <= n; i++) temp += dx(i) * dx(i);
    if (temp < 0.25 * rho * rho) {
      ibrnch = 1;
      goto line_550;
    }
  }

  resnew = 0.0;
  con(mp) = 0.0;
  sum = 0.0;
  for (k = 1; k <= mp; k++) {
    sum = con(k);
    for (i = 1; i <= n; i++) sum -= a(i, k) * dx(i);
    if (k < mp) resnew = std::max(resnew, sum);
  }

  barmu = 0.0;
  prerec = datmat(mpp, np) - resnew;
  if (prerec > 0.0) barmu = sum / prerec;
  if (parmu < 1.5 * barmu) {
    parmu = 2.0 * barmu;
    phi = datmat(mp, np) + parmu * datmat(mpp, np);
    for (j = 1; j <= n; j++) {
      temp = datmat(mp, j) + parmu * datmat(mpp, j);
      if (temp < phi) goto line_140;
      if (temp == phi && parmu == 0.0) {
        if (datmat(mpp, j) < datmat(mpp, np)) goto line_140;
      }
    }
  }
  prerem = parmu * prerec - sum;

  for (i = 1; i <= n; i++) x(i) = sim(i, np) + dx(i);
  ibrnch = 1;
  goto line_40;

line_440:
  vmold = datmat(mp, np) + parmu * datmat(mpp, np);
  vmnew = f + parmu * resmax;
  trured = vmold - vmnew;
  if (parmu == 0.0 && f == datmat(mp, np)) {
    prerem = prerec;
    trured = datmat(mpp, np) - resmax;
  }

  ratio = (trured <= 0.0) ? 1.0 : 0.0;
  jdrop = 0;
  for (j = 1; j <= n; j++) {
    temp = 0.0;
    for (i = 1; i <= n; i++) temp += simi(j, i) * dx(i);
    temp = std::fabs(temp);
    if (temp > ratio) {
      jdrop = j;
      ratio = temp;
    }
    sigbar(j) = temp * vsig(j);
  }

  edgmax = delta * rho;
  l = 0;
  for (j = 1; j <= n; j++) {
    if (sigbar(j) >= parsig || sigbar(j) >= vsig(j)) {
      temp = veta(j);
      if (trured > 0.0) {
        temp = 0.0;
        for (i = 1; i <= n; i++) temp += (dx(i) - sim(i, j)) * (dx(i) - sim(i, j));
        temp = std::sqrt(temp);
      }
      if (temp > edgmax) {
        l = j;
        edgmax = temp;
      }
    }
  }
  if (l > 0) jdrop = l;
  if (jdrop == 0) goto line_550;

  temp = 0.0;
  for (i = 1; i <= n; i++) {
    sim(i, jdrop) = dx(i);
    temp += simi(jdrop, i) * dx(i);
  }
  for (i = 1; i <= n; i++) simi(jdrop, i) = simi(jdrop, i) / temp;
  for (j = 1; j <= n; j++) {
    if (j != jdrop) {
      temp = 0.0;
      for (i = 1; i <= n; i++) temp += simi(j, i) * dx(i);
      for (i = 1; i <= n; i++) simi(j, i) -= temp * simi(jdrop, i);
    }
  }
  for (k = 1; k <= mpp; k++) datmat(k, jdrop) = con(k);

  if (trured > 0.0 && trured >= 0.1 * prerem) goto line_140;
line_550:
  if (iflag == 0) {
    ibrnch = 0;
    goto line_140;
  }

  if (rho > settings.rhoend) {
    rho = 0.5 * rho;
    if (rho <= 1.5 * settings.rhoend) rho = settings.rhoend;
    if (parmu > 0.0) {
      denom = 0.0;
      cmin = cmax = 0.0;
      for (k = 1; k <= mp; k++) {
        cmin = datmat(k, np);
        cmax = cmin;
        for (i = 1; i <= n; i++) {
          cmin = std::min(cmin, datmat(k, i));
          cmax = std::max(cmax, datmat(k, i));
        }
        if (k <= m && cmin < 0.5 * cmax) {
          temp = std::max(cmax, 0.0) - cmin;
          denom = (denom <= 0.0) ? temp : std::min(denom, temp);
        }
      }
      if (denom == 0.0) {
        parmu = 0.0;
      } else if (cmax - cmin < parmu * denom) {
        parmu = (cmax - cmin) / denom;
      }
    }
    goto line_140;
  }

  if (ifull == 1) goto line_620;
line_600:
  for (i = 1; i <= n; i++) x(i) = sim(i, np);
  f = datmat(mp, np);
  resmax = datmat(mpp, np);
line_620:
  CobylaResult res;
  res.x = x.d;
  res.f = f;
  res.max_violation = resmax;
  res.n_evals = nfvals;
  res.status = status;
  return res;
}

CobylaResult cobyla_bounded(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                            const std::vector<double>& lower, const std::vector<double>& upper,
                            const CobylaSettings& settings) {
  const std::size_t n = x0.size();
  if (lower.size() != n || upper.size() != n) throw ValidationError("bounds length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lower[i] <= upper[i])) throw ValidationError("lower bound exceeds upper bound", {"bounds"});
    x0[i] = std::clamp(x0[i], lower[i], upper[i]);
  }

  std::vector<double> best_x = x0;
  double best_f = std::numeric_limits<double>::infinity();
  std::vector<double> clipped(n);

  auto fn = [&](const std::vector<double>& x, std::vector<double>& con) {
    for (std::size_t i = 0; i < n; ++i) {
      con[i] = x[i] - lower[i];
      con[n + i] = upper[i] - x[i];
      clipped[i] = std::clamp(x[i], lower[i], upper[i]);
    }
    const double v = f(clipped);
    if (v < best_f) {
      best_f = v;
      best_x = clipped;
    }
    return v;
  };

  CobylaResult raw = cobyla(static_cast<int>(n), static_cast<int>(2 * n), fn, x0, settings);
  CobylaResult res;
  res.x = best_x;
  res.f = best_f;
  res.max_violation = 0.0;
  res.n_evals = raw.n_evals;
  res.status = raw.status;
  return res;
}

}  // namespace lls
