"""Published field values for side-by-side display only (not reproducible here).

Keys are ``(measurement, band_GHz)``; each maps summary rows to ``(mean, std)``.
"""

SUMMARY_ROWS = (
    "RMS delay spread [ns]",
    "RMS Doppler spread M1 [kHz]",
    "RMS Doppler spread M2 [kHz]",
    "Stationarity region [s]",
)

FIELD_TABLE = {
    (1, 60): {
        "RMS delay spread [ns]": (18.7, 5.94),
        "RMS Doppler spread M1 [kHz]": (1.83, 0.44),
        "RMS Doppler spread M2 [kHz]": (1.65, 0.39),
        "Stationarity region [s]": (0.51, 0.30),
    },
    (1, 80): {
        "RMS delay spread [ns]": (34.9, 18.2),
        "RMS Doppler spread M1 [kHz]": (2.05, 0.45),
        "RMS Doppler spread M2 [kHz]": (1.44, 0.63),
        "Stationarity region [s]": (0.48, 0.23),
    },
    (2, 60): {
        "RMS delay spread [ns]": (22.1, 5.43),
        "RMS Doppler spread M1 [kHz]": (1.91, 0.48),
        "RMS Doppler spread M2 [kHz]": (1.81, 0.45),
        "Stationarity region [s]": (0.47, 0.27),
    },
    (2, 80): {
        "RMS delay spread [ns]": (38.9, 14.7),
        "RMS Doppler spread M1 [kHz]": (2.16, 0.45),
        "RMS Doppler spread M2 [kHz]": (1.57, 0.55),
        "Stationarity region [s]": (0.42, 0.21),
    },
}
