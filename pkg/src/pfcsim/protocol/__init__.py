"""Classical verification (CV) and its publicly verifiable lift (PV)."""
from .cv import (
    CvParams,
    CvProof,
    CvProverRun,
    CvPublic,
    CvSecret,
    ProtocolConfig,
    combine,
    cv_gen,
    cv_meas,
    cv_prove,
    cv_ver,
    d_in,
    d_out,
    fiat_shamir_handle,
    maj,
    mm_combine,
    run_cv_prover,
    test_round_outputs,
)
from .pv import (
    DIGEST_BITS,
    ProofFailure,
    PvKeys,
    PvOracles,
    PvProof,
    PvProvingState,
    PvVerdict,
    PvVerifyKey,
    flip_test_openings,
    message_digest,
    pv_gen,
    pv_prove,
    pv_ver,
    pv_verify,
    replay_signature,
    transcript,
)
