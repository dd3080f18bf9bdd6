"""The pattern corpus: the office temperature-rise query and the six
demand-response examples, as printed (line-wrap whitespace repaired), plus
the shipped fixture encodings of the prose-only ones."""

# verbatim queries (tokens rejoined across the source's line breaks)
SEQ_OFFICE_QUERY = """SELECT(?e1,?e2) FROM(?e1,?e2,stsstream)
WHERE {?e1 evt:hasSource ?src . ?e2 evt:hasSource ?src . ?src bd:hasLocation ?loc . ?loc rdf:type bd:Office} | SEQ(?e1, ?e2(reading-?e1.reading>3) within 5min)"""

EXAMPLE1_QUERY = """SELECT(avg) FROM(?m,meterstream)
WHERE {?m evt:hasSource ?src . ?src bd:hasLocation bd:MHP} | AVG(?m) AS avg WINDOW(?m,sliding,5min) HAVING(avg>27)"""

EXAMPLE3_SEGMENT = "JOIN(?m,?c) ON(?c.schedule-?m.timestamp<3600,?m.reading<0.5)"

EXAMPLE6_QUERY = """SELECT(sum) FROM(?m, meterstream)
WHERE {?m evt:hasSource ?src . ?src bd:hasLocation ?loc . ?loc bd:belongsTo org:EEDepartment} | SUM(?m) AS sum HAVING(sum>600)"""

# fixture encodings of the prose-only examples (2, 4, 5)
EXAMPLE2_FIXTURE = """SELECT(?g,?m) FROM(?g,actionstream) FROM(?m,meterstream)
WHERE {?g evt:hasSource ?gs . ?gs bd:hasLocation bd:MHP . ?m evt:hasSource ?ms . ?ms bd:hasLocation bd:MHP} | SEQ(?g, ?m(reading>30,?m.timestamp-?g.timestamp>=900) within 20min)"""

EXAMPLE4_FIXTURE = """SELECT(?t,?o) FROM(?t,rtempstream) FROM(?o,occstream)
WHERE {?t evt:hasSource ?ts . ?ts bd:hasLocation ?r . ?r rdf:type bd:MeetingRoom . ?o evt:hasSource ?os . ?os bd:hasLocation ?r} | JOIN(?t,?o) ON(?t.reading<73,?o.reading<1,?t.timestamp-?o.timestamp<60,?o.timestamp-?t.timestamp<60)"""

EXAMPLE5_FIXTURE = """SELECT(sum) FROM(?f,fancoilstream)
WHERE {?f evt:hasSource ?src . ?src bd:hasLocation ?r . ?r bd:partOf bd:MHP} | SUM(?f) AS sum WINDOW(?f,latest,30min) HAVING(sum>6)"""

EXAMPLE3_FIXTURE = """SELECT(?m,?c) FROM(?m,meterstream) FROM(?c,schstream)
WHERE {?m evt:hasSource ?src . ?src bd:hasLocation ?lab . ?lab rdf:type bd:ComputerLab . ?c evt:hasSource ?cs . ?cs bd:hasLocation ?lab} | """ + EXAMPLE3_SEGMENT

VERBATIM = {
    "seq_office": SEQ_OFFICE_QUERY,
    "example1": EXAMPLE1_QUERY,
    "example3_full": EXAMPLE3_FIXTURE,   # CEP segment verbatim inside
    "example6": EXAMPLE6_QUERY,
}

ALL_QUERIES = {
    **VERBATIM,
    "example2": EXAMPLE2_FIXTURE,
    "example4": EXAMPLE4_FIXTURE,
    "example5": EXAMPLE5_FIXTURE,
}
