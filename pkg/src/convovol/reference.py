"""Reference figures reported for a private corpus of tandem meetings
(19 students learning French over one semester).

They come from student recordings that are not public, so this package reproduces their
format but cannot reproduce their values. Nothing here is used as a test
oracle.
"""

DATASET = {
    "n_students": 19,
    "n_meetings": 86,
    "total_duration": "66 h 57 min",
    "mean_meeting_duration_min": 47,
    "participants_per_meeting": "3 or 4",
    "mean_focal_share": 0.38,
}

# mean m-CV of each student's k-th meeting, with the number of such meetings
ORDINAL_MEAN_MCV = {1: (7.113, 19), 2: (8.478, 19), 3: (7.905, 19), 4: (5.531, 16)}

MEAN_MCV = 7.596
MEAN_ICV = 3.967

# mean per-student i-CV trend slope per segment
MEAN_SLOPES = {"whole": 0.430, "first_half": -0.471, "second_half": 0.126}

# two-speaker 60 s clip, 10 utterances and 30 s of speech each; the full
# duration sequence was never published
CLIP_ICV = {"Speaker 1": 1.09, "Speaker 2": 2.44}
CLIP_MCV = 1.42
