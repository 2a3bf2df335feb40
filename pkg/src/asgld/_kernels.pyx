# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled twins of the numpy kernels in ``asgld._kernels_py``.

Expression order mirrors the numpy module exactly (and the extension is
built with FP contraction disabled), so both backends produce bit-identical
trajectories.  Keep the two modules in sync when editing either.
"""

from libc.math cimport isfinite, sqrt

BACKEND_NAME = "compiled"


def sgd(double[::1] theta, double[::1] grad, double eta, double[::1] step_out):
    cdef Py_ssize_t i, n = theta.shape[0]
    cdef double st
    cdef bint ok = True
    for i in range(n):
        st = -eta * grad[i]
        step_out[i] = st
        theta[i] += st
        ok = ok and isfinite(theta[i])
    return ok


def momentum(double[::1] theta, double[::1] mu, double[::1] grad,
             double eta, double rho, double[::1] step_out):
    cdef Py_ssize_t i, n = theta.shape[0]
    cdef double omr = 1.0 - rho
    cdef double mn, st
    cdef bint ok = True
    for i in range(n):
        mn = rho * mu[i] + omr * grad[i]
        mu[i] = mn
        st = -eta * mn
        step_out[i] = st
        theta[i] += st
        ok = ok and isfinite(theta[i]) and isfinite(mn)
    return ok


def sgld(double[::1] theta, double[::1] grad, double[::1] z,
         double eta, double sqrt_eps, double[::1] step_out, double[::1] noise_out):
    cdef Py_ssize_t i, n = theta.shape[0]
    cdef double xi, st
    cdef bint ok = True
    for i in range(n):
        xi = sqrt_eps * z[i]
        noise_out[i] = xi
        st = -eta * (grad[i] + xi)
        step_out[i] = st
        theta[i] += st
        ok = ok and isfinite(theta[i])
    return ok


def sghmc(double[::1] theta, double[::1] mu, double[::1] grad, double[::1] z,
          double eta, double rho, double sqrt_eps,
          double[::1] step_out, double[::1] noise_out):
    cdef Py_ssize_t i, n = theta.shape[0]
    cdef double omr = 1.0 - rho
    cdef double mn, xi, st
    cdef bint ok = True
    for i in range(n):
        mn = rho * mu[i] + omr * grad[i]
        mu[i] = mn
        xi = sqrt_eps * z[i]
        noise_out[i] = xi
        st = -eta * (mn + xi)
        step_out[i] = st
        theta[i] += st
        ok = ok and isfinite(theta[i]) and isfinite(mn)
    return ok


def asgld_accumulate(double[::1] mu, double[::1] cov, double[::1] grad, double rho):
    cdef Py_ssize_t i, n = mu.shape[0]
    cdef double omr = 1.0 - rho
    cdef double mo, mn, cv
    cdef bint ok = True
    for i in range(n):
        mo = mu[i]
        mn = rho * mo + omr * grad[i]
        mu[i] = mn
        cv = rho * cov[i] + omr * ((grad[i] - mn) * (grad[i] - mo))
        cov[i] = cv
        ok = ok and isfinite(mn) and isfinite(cv)
    return ok


def asgld(double[::1] theta, double[::1] mu, double[::1] cov,
          double[::1] grad, double[::1] z,
          double eta, double rho, double psi, bint zero_mean,
          double[::1] step_out, double[::1] noise_out):
    cdef Py_ssize_t i, n = theta.shape[0]
    cdef double omr = 1.0 - rho
    cdef double g, mo, mn, cv, clamped, xi, st
    cdef bint ok = True
    for i in range(n):
        g = grad[i]
        mo = mu[i]
        mn = rho * mo + omr * g
        mu[i] = mn
        cv = rho * cov[i] + omr * ((g - mn) * (g - mo))
        cov[i] = cv
        clamped = cv if cv > 0.0 else 0.0
        if zero_mean:
            xi = sqrt(clamped) * z[i]
        else:
            xi = mn + sqrt(clamped) * z[i]
        noise_out[i] = xi
        st = -eta * (g + psi * xi)
        step_out[i] = st
        theta[i] += st
        ok = ok and isfinite(theta[i]) and isfinite(mn) and isfinite(cv)
    return ok


def psgld(double[::1] theta, double[::1] v, double[::1] grad, double[::1] z,
          double eta, double beta2, double stab, double sqrt_eps,
          double[::1] step_out, double[::1] noise_out):
    cdef Py_ssize_t i, n = theta.shape[0]
    cdef double omb2 = 1.0 - beta2
    cdef double g, vn, precond, xi, st
    cdef bint ok = True
    for i in range(n):
        g = grad[i]
        vn = beta2 * v[i] + omb2 * (g * g)
        v[i] = vn
        precond = 1.0 / (sqrt(vn) + stab)
        xi = sqrt(precond) * (sqrt_eps * z[i])
        noise_out[i] = xi
        st = -eta * (precond * g + xi)
        step_out[i] = st
        theta[i] += st
        ok = ok and isfinite(theta[i]) and isfinite(vn)
    return ok


def adagrad(double[::1] theta, double[::1] acc, double[::1] grad,
            double eta, double stab, double[::1] step_out):
    cdef Py_ssize_t i, n = theta.shape[0]
    cdef double g, an, st
    cdef bint ok = True
    for i in range(n):
        g = grad[i]
        an = acc[i] + g * g
        acc[i] = an
        st = -eta * (g / (sqrt(an) + stab))
        step_out[i] = st
        theta[i] += st
        ok = ok and isfinite(theta[i]) and isfinite(an)
    return ok


def adam(double[::1] theta, double[::1] m, double[::1] v, double[::1] grad,
         double eta, double beta1, double beta2, double stab,
         double bc1, double bc2, double[::1] step_out):
    cdef Py_ssize_t i, n = theta.shape[0]
    cdef double omb1 = 1.0 - beta1
    cdef double omb2 = 1.0 - beta2
    cdef double g, mn, vn, mhat, vhat, st
    cdef bint ok = True
    for i in range(n):
        g = grad[i]
        mn = beta1 * m[i] + omb1 * g
        m[i] = mn
        vn = beta2 * v[i] + omb2 * (g * g)
        v[i] = vn
        mhat = mn / bc1
        vhat = vn / bc2
        st = -eta * (mhat / (sqrt(vhat) + stab))
        step_out[i] = st
        theta[i] += st
        ok = ok and isfinite(theta[i]) and isfinite(mn) and isfinite(vn)
    return ok


def amsgrad(double[::1] theta, double[::1] m, double[::1] v, double[::1] vmax,
            double[::1] grad, double eta, double beta1, double beta2,
            double stab, double[::1] step_out):
    cdef Py_ssize_t i, n = theta.shape[0]
    cdef double omb1 = 1.0 - beta1
    cdef double omb2 = 1.0 - beta2
    cdef double g, mn, vn, vm, st
    cdef bint ok = True
    for i in range(n):
        g = grad[i]
        mn = beta1 * m[i] + omb1 * g
        m[i] = mn
        vn = beta2 * v[i] + omb2 * (g * g)
        v[i] = vn
        vm = vmax[i]
        if vn > vm:
            vm = vn
        vmax[i] = vm
        st = -eta * (mn / (sqrt(vm) + stab))
        step_out[i] = st
        theta[i] += st
        ok = ok and isfinite(theta[i]) and isfinite(mn) and isfinite(vn)
    return ok
