# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled propagation kernels.

Semantics match ``_stepper_py`` exactly: advance through midpoint-sampled
Hamiltonians H_k = h_static + diag(f1[k]*d1 + f2[k]*d2), applying the exact
exponential of each sample via LAPACK zheevd.

Layout note: LAPACK/BLAS are column-major.  We store conj(H) in a C-order
buffer so LAPACK sees H itself; the returned eigenvector columns then live in
the *rows* of the buffer (row k = eigenvector v_k, unconjugated).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin
from scipy.linalg.cython_blas cimport zgemm
from scipy.linalg.cython_lapack cimport zheevd

cnp.import_array()

ctypedef double complex zcomplex

DEF TWO_PI = 6.283185307179586


cdef int _eigh_inplace(zcomplex[:, ::1] a, double[::1] w,
                       zcomplex[::1] work, int lwork,
                       double[::1] rwork, int lrwork,
                       int[::1] iwork, int liwork) nogil:
    """zheevd on the conj-filled buffer; rows of `a` become eigenvectors."""
    cdef int n = a.shape[0]
    cdef int info = 0
    cdef char jobz = b'V'
    cdef char uplo = b'L'
    zheevd(&jobz, &uplo, &n, &a[0, 0], &n, &w[0], &work[0], &lwork,
           &rwork[0], &lrwork, &iwork[0], &liwork, &info)
    return info


cdef void _fill_conj_h(zcomplex[:, ::1] h_static, double[::1] d1,
                       double[::1] d2, double f1, double f2,
                       zcomplex[:, ::1] out) nogil:
    cdef int m = h_static.shape[0]
    cdef int i, j
    for i in range(m):
        for j in range(m):
            out[i, j] = h_static[i, j].conjugate()
        out[i, i] = out[i, i] + f1 * d1[i] + f2 * d2[i]


def _workspace(int m):
    """Workspace sizes for zheevd at dimension m (query call)."""
    cdef int n = m, lda = m, info = 0
    cdef int lwork = -1, lrwork = -1, liwork = -1
    cdef zcomplex wkopt
    cdef double rwkopt
    cdef int iwkopt
    cdef zcomplex adummy = 0
    cdef double wdummy = 0
    cdef char jobz = b'V'
    cdef char uplo = b'L'
    zheevd(&jobz, &uplo, &n, &adummy, &lda, &wdummy, &wkopt, &lwork,
           &rwkopt, &lrwork, &iwkopt, &liwork, &info)
    return max(int(wkopt.real), 1), max(int(rwkopt), 1), max(iwkopt, 1)


def step_closed(h_static, d1, d2, f1, f2, double dt, psi):
    """Advance a state vector; see _stepper_py.step_closed."""
    cdef zcomplex[:, ::1] hs = np.ascontiguousarray(h_static, dtype=complex)
    cdef double[::1] dv1 = np.ascontiguousarray(d1, dtype=float)
    cdef double[::1] dv2 = np.ascontiguousarray(d2, dtype=float)
    cdef double[::1] fa = np.ascontiguousarray(f1, dtype=float)
    cdef double[::1] fb = np.ascontiguousarray(f2, dtype=float)
    out = np.array(psi, dtype=complex)
    cdef zcomplex[::1] ps = out
    cdef int m = hs.shape[0]
    cdef int nsteps = fa.shape[0]

    lw, lrw, liw = _workspace(m)
    cdef zcomplex[::1] work = np.empty(lw, dtype=complex)
    cdef double[::1] rwork = np.empty(lrw, dtype=float)
    cdef int[::1] iwork = np.empty(liw, dtype=np.intc)
    cdef zcomplex[:, ::1] hbuf = np.empty((m, m), dtype=complex)
    cdef double[::1] w = np.empty(m, dtype=float)
    cdef zcomplex[::1] c = np.empty(m, dtype=complex)
    cdef int lwork = lw, lrwork = lrw, liwork = liw

    cdef int k, a, b
    cdef int info = 0
    cdef double phase
    cdef zcomplex acc
    with nogil:
        for k in range(nsteps):
            _fill_conj_h(hs, dv1, dv2, fa[k], fb[k], hbuf)
            info = _eigh_inplace(hbuf, w, work, lwork, rwork, lrwork,
                                 iwork, liwork)
            if info != 0:
                break
            # c = V^dag psi ; rows of hbuf are eigenvectors v_k
            for b in range(m):
                acc = 0
                for a in range(m):
                    acc = acc + hbuf[b, a].conjugate() * ps[a]
                phase = -TWO_PI * w[b] * dt
                c[b] = acc * (cos(phase) + 1j * sin(phase))
            for a in range(m):
                acc = 0
                for b in range(m):
                    acc = acc + hbuf[b, a] * c[b]
                ps[a] = acc
    if info != 0:
        raise RuntimeError(f"zheevd failed with info={info}")
    return out


def step_open(h_static, d1, d2, f1, f2, double dt, rho, lowers, anticomm):
    """Advance a density matrix; see _stepper_py.step_open.

    Collapse operators must be real (amplitude-damping ladders are); the
    anticommutator matrix must be real symmetric.
    """
    low_arr = np.ascontiguousarray(lowers, dtype=complex)
    anti_arr = np.ascontiguousarray(anticomm, dtype=complex)
    if low_arr.size and (np.abs(low_arr.imag).max() > 0
                         or np.abs(anti_arr.imag).max() > 0):
        raise ValueError("compiled step_open requires real collapse operators")

    cdef zcomplex[:, ::1] hs = np.ascontiguousarray(h_static, dtype=complex)
    cdef double[::1] dv1 = np.ascontiguousarray(d1, dtype=float)
    cdef double[::1] dv2 = np.ascontiguousarray(d2, dtype=float)
    cdef double[::1] fa = np.ascontiguousarray(f1, dtype=float)
    cdef double[::1] fb = np.ascontiguousarray(f2, dtype=float)
    rho_out = np.ascontiguousarray(rho, dtype=complex)
    if rho_out is rho:
        rho_out = rho_out.copy()
    cdef zcomplex[:, ::1] r = rho_out
    cdef zcomplex[:, ::1] anti = anti_arr
    cdef int nlow = low_arr.shape[0]
    cdef int m = hs.shape[0]
    low2 = (low_arr.reshape(nlow * m, m) if nlow
            else np.zeros((1, m), dtype=complex))
    cdef zcomplex[:, ::1] lowflat = low2
    cdef int nsteps = fa.shape[0]

    lw, lrw, liw = _workspace(m)
    cdef zcomplex[::1] work = np.empty(lw, dtype=complex)
    cdef double[::1] rwork = np.empty(lrw, dtype=float)
    cdef int[::1] iwork = np.empty(liw, dtype=np.intc)
    cdef zcomplex[:, ::1] hbuf = np.empty((m, m), dtype=complex)
    cdef zcomplex[:, ::1] wbuf = np.empty((m, m), dtype=complex)
    cdef zcomplex[:, ::1] ubuf = np.empty((m, m), dtype=complex)
    cdef zcomplex[:, ::1] t1 = np.empty((m, m), dtype=complex)
    cdef zcomplex[:, ::1] t2 = np.empty((m, m), dtype=complex)
    cdef zcomplex[:, ::1] t3 = np.empty((m, m), dtype=complex)
    cdef zcomplex[:, ::1] acc = np.empty((m, m), dtype=complex)
    cdef double[::1] w = np.empty(m, dtype=float)
    cdef int lwork = lw, lrwork = lrw, liwork = liw

    cdef int k, a, b, j
    cdef int info = 0
    cdef double phase, tr_in, tr_out, scale
    cdef zcomplex ek
    cdef zcomplex one = 1.0, zero = 0.0, dtz, dt2z
    cdef char cn = b'N'
    cdef char ct = b'T'
    cdef char cc = b'C'
    dtz = dt
    dt2z = dt * dt

    with nogil:
        for k in range(nsteps):
            _fill_conj_h(hs, dv1, dv2, fa[k], fb[k], hbuf)
            info = _eigh_inplace(hbuf, w, work, lwork, rwork, lrwork,
                                 iwork, liwork)
            if info != 0:
                break
            # wbuf row b = conj(e_b) * conj(v_b); its column-major view is
            # V* E*, so ubuf (col-major) = (V* E*) V^T = U*.  The rho
            # buffer's column-major view is rho* (rho is Hermitian), and
            # rho'* = U* rho* (U*)^dag, so two plain gemms update it.
            for b in range(m):
                phase = -TWO_PI * w[b] * dt
                ek = cos(phase) + 1j * sin(phase)
                for a in range(m):
                    wbuf[b, a] = (ek * hbuf[b, a]).conjugate()
            zgemm(&cn, &ct, &m, &m, &m, &one, &wbuf[0, 0], &m,
                  &hbuf[0, 0], &m, &zero, &ubuf[0, 0], &m)
            zgemm(&cn, &cn, &m, &m, &m, &one, &ubuf[0, 0], &m,
                  &r[0, 0], &m, &zero, &t1[0, 0], &m)
            zgemm(&cn, &cc, &m, &m, &m, &one, &t1[0, 0], &m,
                  &ubuf[0, 0], &m, &zero, &r[0, 0], &m)
            if nlow > 0:
                # damping on the conjugated buffer: real L and S give
                # rho*' += dt * (sum_j L rho* L^T - S rho* - rho* S);
                # col-major views: L = op_T(buffer), S = buffer.
                for a in range(m):
                    for b in range(m):
                        acc[a, b] = 0
                for j in range(nlow):
                    zgemm(&ct, &cn, &m, &m, &m, &one, &lowflat[j * m, 0], &m,
                          &r[0, 0], &m, &zero, &t1[0, 0], &m)
                    zgemm(&cn, &cn, &m, &m, &m, &one, &t1[0, 0], &m,
                          &lowflat[j * m, 0], &m, &one, &acc[0, 0], &m)
                zgemm(&cn, &cn, &m, &m, &m, &one, &anti[0, 0], &m,
                      &r[0, 0], &m, &zero, &t2[0, 0], &m)
                zgemm(&cn, &cn, &m, &m, &m, &one, &r[0, 0], &m,
                      &anti[0, 0], &m, &zero, &t1[0, 0], &m)
                # Kraus completion dt^2 * S rho S keeps the map completely
                # positive at any step size; renormalize its trace away
                zgemm(&cn, &cn, &m, &m, &m, &one, &t2[0, 0], &m,
                      &anti[0, 0], &m, &zero, &t3[0, 0], &m)
                tr_in = 0.0
                for a in range(m):
                    tr_in = tr_in + r[a, a].real
                for a in range(m):
                    for b in range(m):
                        r[a, b] = (r[a, b] + dtz * (acc[a, b] - t2[a, b]
                                                    - t1[a, b])
                                   + dt2z * t3[a, b])
                tr_out = 0.0
                for a in range(m):
                    tr_out = tr_out + r[a, a].real
                scale = tr_in / tr_out
                for a in range(m):
                    for b in range(m):
                        r[a, b] = r[a, b] * scale
    if info != 0:
        raise RuntimeError(f"zheevd failed with info={info}")
    return rho_out
